#ifndef TEP_TREE_HPP_
#define TEP_TREE_HPP_

#include <cstdint>
#include <stdexcept>

namespace tep {

/// Complete binary tree with h levels, nodes 1..2^h-1 in heap order.
/// Children of node i are 2i and 2i+1; leaves are [2^(h-1), 2^h-1].
struct TreeShape {
    int h = 0;

    TreeShape() = default;
    explicit TreeShape(int height) : h(height) {
        if (h < 2) throw std::invalid_argument("tree height must be >= 2 (internal root required)");
        if (h > 25) throw std::invalid_argument("tree height too large");
    }

    int node_count() const { return (1 << h) - 1; }
    int first_leaf() const { return 1 << (h - 1); }
    int leaf_count() const { return 1 << (h - 1); }
    int internal_count() const { return (1 << (h - 1)) - 1; }

    bool valid_node(int i) const { return i >= 1 && i <= node_count(); }
    bool is_leaf(int i) const { return i >= first_leaf() && i <= node_count(); }
    bool is_internal(int i) const { return i >= 1 && i < first_leaf(); }
    static int left(int i) { return 2 * i; }
    static int right(int i) { return 2 * i + 1; }
    static int parent(int i) { return i / 2; }
    static int sibling(int i) { return (i % 2 == 0) ? i + 1 : i - 1; }

    friend bool operator==(const TreeShape& a, const TreeShape& b) { return a.h == b.h; }
};

}  // namespace tep

#endif  // TEP_TREE_HPP_
