// SPDX-License-Identifier: MIT

#include "resr/expr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

namespace resr {

namespace {

constexpr std::array<std::string_view, 14> kNames{
    "const", "t", "add", "sub", "mul", "div", "pow", "cos", "sin", "exp", "log", "tan", "sqrt", "neg",
};

} // namespace

int arity(NodeKind kind) noexcept
{
    switch (kind) {
    case NodeKind::Constant:
    case NodeKind::Variable:
        return 0;
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div:
    case NodeKind::Pow:
        return 2;
    default:
        return 1;
    }
}

bool is_unary(NodeKind kind) noexcept { return arity(kind) == 1; }
bool is_binary(NodeKind kind) noexcept { return arity(kind) == 2; }
bool is_commutative(NodeKind kind) noexcept { return kind == NodeKind::Add || kind == NodeKind::Mul; }

std::string_view kind_name(NodeKind kind) noexcept { return kNames[static_cast<std::size_t>(kind)]; }

NodeKind kind_from_name(std::string_view name)
{
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == name) {
            return static_cast<NodeKind>(i);
        }
    }
    throw std::invalid_argument("unknown operator name: " + std::string(name));
}

Expr::Expr() : nodes_{Node{NodeKind::Constant, 0.0}} {}

Expr Expr::constant(double value)
{
    if (std::isnan(value)) {
        throw std::invalid_argument("NaN constant");
    }
    return Expr({Node{NodeKind::Constant, value}});
}

Expr Expr::variable() { return Expr({Node{NodeKind::Variable, 0.0}}); }

Expr Expr::unary(NodeKind kind, const Expr& child)
{
    if (!is_unary(kind)) {
        throw std::invalid_argument("not a unary operator: " + std::string(kind_name(kind)));
    }
    std::vector<Node> nodes;
    nodes.reserve(child.size() + 1);
    nodes.push_back(Node{kind, 0.0});
    nodes.insert(nodes.end(), child.nodes_.begin(), child.nodes_.end());
    return Expr(std::move(nodes));
}

Expr Expr::binary(NodeKind kind, const Expr& lhs, const Expr& rhs)
{
    if (!is_binary(kind)) {
        throw std::invalid_argument("not a binary operator: " + std::string(kind_name(kind)));
    }
    std::vector<Node> nodes;
    nodes.reserve(lhs.size() + rhs.size() + 1);
    nodes.push_back(Node{kind, 0.0});
    nodes.insert(nodes.end(), lhs.nodes_.begin(), lhs.nodes_.end());
    nodes.insert(nodes.end(), rhs.nodes_.begin(), rhs.nodes_.end());
    return Expr(std::move(nodes));
}

Expr Expr::from_preorder(std::vector<Node> nodes)
{
    if (nodes.empty()) {
        throw std::invalid_argument("empty expression");
    }
    long open = 1;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (open <= 0) {
            throw std::invalid_argument("trailing nodes after a complete tree");
        }
        const auto& n = nodes[i];
        if (n.kind == NodeKind::Constant && std::isnan(n.value)) {
            throw std::invalid_argument("NaN constant");
        }
        if (n.kind > NodeKind::Neg) {
            throw std::invalid_argument("invalid node kind");
        }
        open += arity(n.kind) - 1;
    }
    if (open != 0) {
        throw std::invalid_argument("incomplete tree: arity mismatch");
    }
    for (auto& n : nodes) {
        if (n.kind != NodeKind::Constant) {
            n.value = 0.0;
        }
    }
    return Expr(std::move(nodes));
}

std::size_t Expr::subtree_end(std::size_t index) const noexcept
{
    long need = 1;
    std::size_t i = index;
    while (need > 0) {
        need += arity(nodes_[i].kind) - 1;
        ++i;
    }
    return i;
}

std::vector<std::size_t> Expr::children(std::size_t index) const
{
    std::vector<std::size_t> out;
    const int n = arity(nodes_[index].kind);
    std::size_t next = index + 1;
    for (int c = 0; c < n; ++c) {
        out.push_back(next);
        next = subtree_end(next);
    }
    return out;
}

Expr Expr::subtree(std::size_t index) const
{
    return Expr(std::vector<Node>(nodes_.begin() + static_cast<std::ptrdiff_t>(index),
        nodes_.begin() + static_cast<std::ptrdiff_t>(subtree_end(index))));
}

Expr Expr::child(std::size_t which) const
{
    auto idx = children(0);
    if (which >= idx.size()) {
        throw std::out_of_range("child index out of range");
    }
    return subtree(idx[which]);
}

Expr Expr::replace_subtree(std::size_t index, const Expr& replacement) const
{
    const auto end = subtree_end(index);
    std::vector<Node> nodes;
    nodes.reserve(nodes_.size() - (end - index) + replacement.size());
    nodes.insert(nodes.end(), nodes_.begin(), nodes_.begin() + static_cast<std::ptrdiff_t>(index));
    nodes.insert(nodes.end(), replacement.nodes_.begin(), replacement.nodes_.end());
    nodes.insert(nodes.end(), nodes_.begin() + static_cast<std::ptrdiff_t>(end), nodes_.end());
    return Expr(std::move(nodes));
}

Expr Expr::replace_node(std::size_t index, Node node) const
{
    if (arity(node.kind) != arity(nodes_[index].kind)) {
        throw std::invalid_argument("replace_node must preserve arity");
    }
    if (node.kind == NodeKind::Constant && std::isnan(node.value)) {
        throw std::invalid_argument("NaN constant");
    }
    if (node.kind != NodeKind::Constant) {
        node.value = 0.0;
    }
    auto nodes = nodes_;
    nodes[index] = node;
    return Expr(std::move(nodes));
}

std::size_t Expr::depth() const
{
    // Preorder walk carrying the depth of each pending child slot.
    std::vector<std::size_t> pending{1};
    std::size_t best = 0;
    for (const auto& n : nodes_) {
        const auto d = pending.back();
        pending.pop_back();
        best = std::max(best, d);
        for (int c = 0; c < arity(n.kind); ++c) {
            pending.push_back(d + 1);
        }
    }
    return best;
}

std::size_t Expr::constant_count() const noexcept
{
    return static_cast<std::size_t>(std::count_if(
        nodes_.begin(), nodes_.end(), [](const Node& n) { return n.kind == NodeKind::Constant; }));
}

std::vector<double> Expr::constants() const
{
    std::vector<double> out;
    for (const auto& n : nodes_) {
        if (n.kind == NodeKind::Constant) {
            out.push_back(n.value);
        }
    }
    return out;
}

Expr Expr::with_constants(std::span<const double> values) const
{
    if (values.size() != constant_count()) {
        throw std::invalid_argument("constant vector size mismatch");
    }
    auto nodes = nodes_;
    std::size_t k = 0;
    for (auto& n : nodes) {
        if (n.kind == NodeKind::Constant) {
            if (std::isnan(values[k])) {
                throw std::invalid_argument("NaN constant");
            }
            n.value = values[k++];
        }
    }
    return Expr(std::move(nodes));
}

bool Expr::has_variable() const noexcept
{
    return std::any_of(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.kind == NodeKind::Variable; });
}

std::size_t complexity(const Expr& e) noexcept { return e.size(); }

EvalContext::EvalContext(std::vector<double> t_values, bool protected_ops)
    : t_(std::move(t_values)), protected_(protected_ops)
{
    if (t_.empty()) {
        throw std::invalid_argument("EvalContext: empty time grid");
    }
    for (std::size_t i = 1; i < t_.size(); ++i) {
        if (!(t_[i] > t_[i - 1])) {
            throw std::invalid_argument("EvalContext: time grid must be strictly increasing");
        }
    }
}

namespace {

inline double protected_log(double u) noexcept
{
    if (u == 0.0) {
        return kLogZeroSentinel;
    }
    return std::log(std::fabs(u));
}

inline double protected_div(double a, double b) noexcept
{
    return b == 0.0 ? std::numeric_limits<double>::quiet_NaN() : a / b;
}

inline double protected_tan(double u) noexcept
{
    if (std::fabs(std::cos(u)) < 1e-12) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return std::tan(u);
}

void apply_unary(NodeKind kind, bool prot, double* v, std::size_t n) noexcept
{
    switch (kind) {
    case NodeKind::Cos:
        for (std::size_t i = 0; i < n; ++i) v[i] = std::cos(v[i]);
        break;
    case NodeKind::Sin:
        for (std::size_t i = 0; i < n; ++i) v[i] = std::sin(v[i]);
        break;
    case NodeKind::Exp:
        for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(v[i]);
        break;
    case NodeKind::Log:
        if (prot) {
            for (std::size_t i = 0; i < n; ++i) v[i] = protected_log(v[i]);
        } else {
            for (std::size_t i = 0; i < n; ++i) v[i] = std::log(v[i]);
        }
        break;
    case NodeKind::Tan:
        if (prot) {
            for (std::size_t i = 0; i < n; ++i) v[i] = protected_tan(v[i]);
        } else {
            for (std::size_t i = 0; i < n; ++i) v[i] = std::tan(v[i]);
        }
        break;
    case NodeKind::Sqrt:
        if (prot) {
            for (std::size_t i = 0; i < n; ++i) v[i] = std::sqrt(std::fabs(v[i]));
        } else {
            for (std::size_t i = 0; i < n; ++i) v[i] = std::sqrt(v[i]);
        }
        break;
    case NodeKind::Neg:
        for (std::size_t i = 0; i < n; ++i) v[i] = -v[i];
        break;
    default:
        break;
    }
}

// out <- lhs op rhs; out may alias either operand.
void apply_binary(NodeKind kind, bool prot, const double* lhs, const double* rhs, double* out, std::size_t n) noexcept
{
    switch (kind) {
    case NodeKind::Add:
        for (std::size_t i = 0; i < n; ++i) out[i] = lhs[i] + rhs[i];
        break;
    case NodeKind::Sub:
        for (std::size_t i = 0; i < n; ++i) out[i] = lhs[i] - rhs[i];
        break;
    case NodeKind::Mul:
        for (std::size_t i = 0; i < n; ++i) out[i] = lhs[i] * rhs[i];
        break;
    case NodeKind::Div:
        if (prot) {
            for (std::size_t i = 0; i < n; ++i) out[i] = protected_div(lhs[i], rhs[i]);
        } else {
            for (std::size_t i = 0; i < n; ++i) out[i] = lhs[i] / rhs[i];
        }
        break;
    case NodeKind::Pow:
        for (std::size_t i = 0; i < n; ++i) out[i] = std::pow(lhs[i], rhs[i]);
        break;
    default:
        break;
    }
}

} // namespace

void Evaluator::evaluate(const Expr& e, std::span<const double> t, bool protected_ops, std::span<double> out)
{
    evaluate(e.nodes(), t, protected_ops, out);
}

void Evaluator::evaluate(std::span<const Node> nodes, std::span<const double> t, bool protected_ops, std::span<double> out)
{
    const std::size_t n = t.size();
    // Reverse preorder is a postorder of the mirrored tree: the first child of
    // a node ends up on top of the stack when the node is reached.
    std::size_t needed = 0;
    {
        std::size_t sp = 0;
        for (std::size_t k = nodes.size(); k-- > 0;) {
            sp = sp + 1 - static_cast<std::size_t>(arity(nodes[k].kind));
            needed = std::max(needed, sp);
        }
    }
    if (stack_.size() < needed * n) {
        stack_.resize(needed * n);
    }
    std::size_t sp = 0;
    double* base = stack_.data();
    for (std::size_t k = nodes.size(); k-- > 0;) {
        const auto& node = nodes[k];
        switch (arity(node.kind)) {
        case 0: {
            double* slot = base + sp * n;
            if (node.kind == NodeKind::Constant) {
                std::fill(slot, slot + n, node.value);
            } else {
                std::copy(t.begin(), t.end(), slot);
            }
            ++sp;
            break;
        }
        case 1:
            apply_unary(node.kind, protected_ops, base + (sp - 1) * n, n);
            break;
        default: {
            double* first = base + (sp - 1) * n;
            double* second = base + (sp - 2) * n;
            apply_binary(node.kind, protected_ops, first, second, second, n);
            --sp;
            break;
        }
        }
    }
    std::copy(base, base + n, out.begin());
}

double Evaluator::evaluate_scalar(const Expr& e, double t, bool protected_ops)
{
    double out = 0.0;
    evaluate(e, std::span<const double>(&t, 1), protected_ops, std::span<double>(&out, 1));
    return out;
}

std::vector<double> evaluate(const Expr& e, const EvalContext& ctx)
{
    std::vector<double> out(ctx.size());
    Evaluator ev;
    ev.evaluate(e, ctx.t_values(), ctx.protected_ops(), out);
    return out;
}

} // namespace resr
