// SPDX-License-Identifier: MIT

#include "resr/expr.hpp"

#include <cmath>
#include <optional>

namespace resr {

namespace {

bool is_const(const Expr& e, double v) { return e.size() == 1 && e.root().kind == NodeKind::Constant && e.root().value == v; }
bool is_const(const Expr& e) { return e.size() == 1 && e.root().kind == NodeKind::Constant; }

// IEEE evaluation of a node over constant operands; nullopt if not finite.
std::optional<double> fold(NodeKind kind, double a, double b)
{
    double r = 0.0;
    switch (kind) {
    case NodeKind::Add: r = a + b; break;
    case NodeKind::Sub: r = a - b; break;
    case NodeKind::Mul: r = a * b; break;
    case NodeKind::Div: r = a / b; break;
    case NodeKind::Pow: r = std::pow(a, b); break;
    case NodeKind::Cos: r = std::cos(a); break;
    case NodeKind::Sin: r = std::sin(a); break;
    case NodeKind::Exp: r = std::exp(a); break;
    case NodeKind::Log: r = std::log(a); break;
    case NodeKind::Tan: r = std::tan(a); break;
    case NodeKind::Sqrt: r = std::sqrt(a); break;
    case NodeKind::Neg: r = -a; break;
    default: return std::nullopt;
    }
    if (!std::isfinite(r)) {
        return std::nullopt;
    }
    // tan near a pole is finite in floating point but protected evaluation
    // treats it as undefined; leave such nodes alone.
    if (kind == NodeKind::Tan && std::fabs(std::cos(a)) < 1e-12) {
        return std::nullopt;
    }
    // Division by a zero divisor is undefined under protected evaluation.
    if (kind == NodeKind::Div && b == 0.0) {
        return std::nullopt;
    }
    return r;
}

Expr simplify_at(const Expr& e, std::size_t i)
{
    const Node& n = e[i];
    const int k = arity(n.kind);
    if (k == 0) {
        return e.subtree(i);
    }
    const auto kids = e.children(i);
    if (k == 1) {
        Expr c = simplify_at(e, kids[0]);
        if (is_const(c)) {
            if (auto v = fold(n.kind, c.root().value, 0.0)) {
                return Expr::constant(*v);
            }
        }
        if (n.kind == NodeKind::Neg && c.root().kind == NodeKind::Neg) {
            return c.child(0);
        }
        return Expr::unary(n.kind, c);
    }
    Expr a = simplify_at(e, kids[0]);
    Expr b = simplify_at(e, kids[1]);
    if (is_const(a) && is_const(b)) {
        if (auto v = fold(n.kind, a.root().value, b.root().value)) {
            return Expr::constant(*v);
        }
    }
    switch (n.kind) {
    case NodeKind::Add:
        if (is_const(b, 0.0)) return a;
        if (is_const(a, 0.0)) return b;
        if (a == b && !is_const(a)) return Expr::binary(NodeKind::Mul, Expr::constant(2.0), a);
        break;
    case NodeKind::Sub:
        if (is_const(b, 0.0)) return a;
        if (a == b) return Expr::constant(0.0);
        break;
    case NodeKind::Mul:
        if (is_const(b, 1.0)) return a;
        if (is_const(a, 1.0)) return b;
        if (is_const(a, 0.0) || is_const(b, 0.0)) return Expr::constant(0.0);
        break;
    case NodeKind::Div:
        if (is_const(b, 1.0)) return a;
        break;
    case NodeKind::Pow:
        if (is_const(b, 1.0)) return a;
        if (is_const(b, 0.0)) return Expr::constant(1.0);
        break;
    default:
        break;
    }
    return Expr::binary(n.kind, a, b);
}

} // namespace

Expr simplify(const Expr& e) { return simplify_at(e, 0); }

} // namespace resr
