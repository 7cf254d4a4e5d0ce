// SPDX-License-Identifier: MIT

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace resr {

enum class NodeKind : std::uint8_t {
    Constant,
    Variable,
    // binary
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    // unary
    Cos,
    Sin,
    Exp,
    Log,
    Tan,
    Sqrt,
    Neg,
};

int arity(NodeKind kind) noexcept;
bool is_unary(NodeKind kind) noexcept;
bool is_binary(NodeKind kind) noexcept;
bool is_commutative(NodeKind kind) noexcept;

// Lower-case operator name ("add", "cos", "const", "t").
std::string_view kind_name(NodeKind kind) noexcept;
// Inverse of kind_name; throws std::invalid_argument for unknown names.
NodeKind kind_from_name(std::string_view name);

struct Node {
    NodeKind kind = NodeKind::Constant;
    double value = 0.0; // meaningful for constants only

    friend bool operator==(const Node&, const Node&) = default;
};

// Immutable expression tree over the single variable `t`.
//
// Nodes are stored in preorder; each subtree occupies a contiguous range, so
// subtree extraction and replacement are slice operations. Copies are cheap
// for the tree sizes used in search (tens of nodes).
class Expr {
public:
    Expr(); // the constant 0

    static Expr constant(double value);
    static Expr variable();
    static Expr unary(NodeKind kind, const Expr& child);
    static Expr binary(NodeKind kind, const Expr& lhs, const Expr& rhs);
    // Validates arity, the absence of NaN and the single-root property.
    static Expr from_preorder(std::vector<Node> nodes);

    std::span<const Node> nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    const Node& root() const noexcept { return nodes_.front(); }
    const Node& operator[](std::size_t i) const noexcept { return nodes_[i]; }

    // One past the last node of the subtree rooted at `index`.
    std::size_t subtree_end(std::size_t index) const noexcept;
    // Preorder indices of the children of `index`.
    std::vector<std::size_t> children(std::size_t index) const;
    Expr subtree(std::size_t index) const;
    Expr child(std::size_t which) const;
    Expr replace_subtree(std::size_t index, const Expr& replacement) const;
    Expr replace_node(std::size_t index, Node node) const; // must keep arity
    std::size_t depth() const;

    std::size_t constant_count() const noexcept;
    std::vector<double> constants() const;
    Expr with_constants(std::span<const double> values) const;
    bool has_variable() const noexcept;

    friend bool operator==(const Expr&, const Expr&) = default;

private:
    explicit Expr(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}
    std::vector<Node> nodes_;
};

enum class ParseErrorKind {
    EmptyInput,
    UnknownIdentifier,
    UnbalancedParentheses,
    ArityMismatch,
    UnexpectedToken,
    InvalidNumber,
};

std::string_view to_string(ParseErrorKind kind) noexcept;

class ParseError : public std::runtime_error {
public:
    ParseError(ParseErrorKind kind, std::size_t offset, const std::string& detail);
    ParseErrorKind kind() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    ParseErrorKind kind_;
    std::size_t offset_;
};

// Infix grammar (see docs/grammar.md). Unary minus directly in front of a
// numeric literal folds into a negative constant unless the literal is the
// base of `^`.
Expr parse(std::string_view text);

// Minimal-parenthesization infix form; parse(to_string(e)) == e.
std::string to_string(const Expr& e);

// Time grid for evaluation. Throws std::invalid_argument unless non-empty and
// strictly increasing.
class EvalContext {
public:
    explicit EvalContext(std::vector<double> t_values, bool protected_ops = true);

    std::span<const double> t_values() const noexcept { return t_; }
    bool protected_ops() const noexcept { return protected_; }
    std::size_t size() const noexcept { return t_.size(); }

private:
    std::vector<double> t_;
    bool protected_;
};

// log(0) under protected evaluation.
inline constexpr double kLogZeroSentinel = -1.0e10;

std::vector<double> evaluate(const Expr& e, const EvalContext& ctx);

// Reusable buffers for the allocation-free evaluation path used in hot loops.
class Evaluator {
public:
    void evaluate(const Expr& e, std::span<const double> t, bool protected_ops, std::span<double> out);
    // Same on a raw preorder node list, which must form a valid tree.
    void evaluate(std::span<const Node> nodes, std::span<const double> t, bool protected_ops, std::span<double> out);
    double evaluate_scalar(const Expr& e, double t, bool protected_ops);

private:
    std::vector<double> stack_;
};

std::size_t complexity(const Expr& e) noexcept;

// Constant folding and identity rules; never grows the tree.
Expr simplify(const Expr& e);

// Ordered-tree edit distance with unit costs (Zhang-Shasha). All constants
// share a single label.
std::size_t tree_edit_distance(const Expr& a, const Expr& b);
double normalized_ted_similarity(const Expr& a, const Expr& b);

// Children of add/mul sorted into a canonical order.
Expr canonicalize_commutative(const Expr& e);
// min(ordered TED, ordered TED of the canonicalized pair).
std::size_t commutative_tree_edit_distance(const Expr& a, const Expr& b);
double commutative_ted_similarity(const Expr& a, const Expr& b);

} // namespace resr
