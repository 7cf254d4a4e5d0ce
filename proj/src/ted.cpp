// SPDX-License-Identifier: MIT

#include "resr/expr.hpp"

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>

namespace resr {

namespace {

// Postorder view of an expression for the Zhang-Shasha recurrences. Nodes
// are numbered 1..n; index 0 is unused.
struct PostorderTree {
    std::vector<std::uint8_t> label;
    std::vector<std::size_t> leftmost; // leftmost leaf descendant
    std::vector<std::size_t> keyroots;

    explicit PostorderTree(const Expr& e)
    {
        label.assign(1, 0);
        leftmost.assign(1, 0);
        build(e, 0);
        const std::size_t n = label.size() - 1;
        // A keyroot is the highest-numbered node among those sharing a leftmost leaf.
        std::vector<bool> seen(n + 1, false);
        for (std::size_t i = n; i >= 1; --i) {
            if (!seen[leftmost[i]]) {
                seen[leftmost[i]] = true;
                keyroots.push_back(i);
            }
        }
        std::sort(keyroots.begin(), keyroots.end());
    }

    std::size_t size() const { return label.size() - 1; }

private:
    // Returns the postorder number of the node at preorder index `i`.
    std::size_t build(const Expr& e, std::size_t i)
    {
        std::size_t first_leaf = 0;
        for (auto c : e.children(i)) {
            const auto id = build(e, c);
            if (first_leaf == 0) {
                first_leaf = leftmost[id];
            }
        }
        const auto& node = e[i];
        label.push_back(static_cast<std::uint8_t>(node.kind));
        const std::size_t id = label.size() - 1;
        leftmost.push_back(first_leaf == 0 ? id : first_leaf);
        return id;
    }
};

std::size_t zhang_shasha(const PostorderTree& a, const PostorderTree& b)
{
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::vector<std::size_t> treedist((n + 1) * (m + 1), 0);
    std::vector<std::size_t> fd((n + 2) * (m + 2), 0);
    auto td = [&](std::size_t i, std::size_t j) -> std::size_t& { return treedist[i * (m + 1) + j]; };

    for (auto i : a.keyroots) {
        for (auto j : b.keyroots) {
            const std::size_t li = a.leftmost[i];
            const std::size_t lj = b.leftmost[j];
            // forestdist over ranges li..x, lj..y, offset so li-1 maps to 0.
            const std::size_t rows = i - li + 2;
            const std::size_t cols = j - lj + 2;
            auto f = [&](std::size_t x, std::size_t y) -> std::size_t& { return fd[x * cols + y]; };
            f(0, 0) = 0;
            for (std::size_t x = 1; x < rows; ++x) f(x, 0) = f(x - 1, 0) + 1;
            for (std::size_t y = 1; y < cols; ++y) f(0, y) = f(0, y - 1) + 1;
            for (std::size_t x = 1; x < rows; ++x) {
                const std::size_t ai = li + x - 1;
                for (std::size_t y = 1; y < cols; ++y) {
                    const std::size_t bj = lj + y - 1;
                    const std::size_t del = f(x - 1, y) + 1;
                    const std::size_t ins = f(x, y - 1) + 1;
                    if (a.leftmost[ai] == li && b.leftmost[bj] == lj) {
                        const std::size_t sub = f(x - 1, y - 1) + (a.label[ai] == b.label[bj] ? 0 : 1);
                        f(x, y) = std::min({del, ins, sub});
                        td(ai, bj) = f(x, y);
                    } else {
                        const std::size_t px = a.leftmost[ai] - li;
                        const std::size_t py = b.leftmost[bj] - lj;
                        f(x, y) = std::min({del, ins, f(px, py) + td(ai, bj)});
                    }
                }
            }
        }
    }
    return td(n, m);
}

// A total order on subtrees that ignores constant values.
std::string shape_key(const Expr& e, std::size_t i)
{
    const auto& n = e[i];
    std::string out(kind_name(n.kind));
    const auto kids = e.children(i);
    if (!kids.empty()) {
        out += '(';
        for (std::size_t k = 0; k < kids.size(); ++k) {
            if (k) out += ',';
            out += shape_key(e, kids[k]);
        }
        out += ')';
    }
    return out;
}

Expr canonical_at(const Expr& e, std::size_t i)
{
    const auto& n = e[i];
    const auto kids = e.children(i);
    if (kids.empty()) {
        return e.subtree(i);
    }
    if (kids.size() == 1) {
        return Expr::unary(n.kind, canonical_at(e, kids[0]));
    }
    Expr a = canonical_at(e, kids[0]);
    Expr b = canonical_at(e, kids[1]);
    if (is_commutative(n.kind)) {
        auto ka = shape_key(a, 0);
        auto kb = shape_key(b, 0);
        auto rank = [](const Expr& x, const std::string& k) { return std::make_pair(x.size(), k); };
        if (rank(b, kb) < rank(a, ka)) {
            std::swap(a, b);
        }
    }
    return Expr::binary(n.kind, a, b);
}

double similarity(std::size_t distance, const Expr& a, const Expr& b)
{
    const double denom = static_cast<double>(std::max(complexity(a), complexity(b)));
    const double s = 1.0 - static_cast<double>(distance) / denom;
    return std::clamp(s, 0.0, 1.0);
}

} // namespace

std::size_t tree_edit_distance(const Expr& a, const Expr& b)
{
    return zhang_shasha(PostorderTree(a), PostorderTree(b));
}

double normalized_ted_similarity(const Expr& a, const Expr& b) { return similarity(tree_edit_distance(a, b), a, b); }

Expr canonicalize_commutative(const Expr& e) { return canonical_at(e, 0); }

std::size_t commutative_tree_edit_distance(const Expr& a, const Expr& b)
{
    return std::min(tree_edit_distance(a, b),
        tree_edit_distance(canonicalize_commutative(a), canonicalize_commutative(b)));
}

double commutative_ted_similarity(const Expr& a, const Expr& b)
{
    return similarity(commutative_tree_edit_distance(a, b), a, b);
}

} // namespace resr
