#ifndef TEP_INSTANCE_HPP_
#define TEP_INSTANCE_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "tep/tree.hpp"
#include "tep/util.hpp"

namespace tep {

/// One input slot: either a leaf value v_i or a table entry f_i(x,y).
struct QueryId {
    enum Kind { Leaf, Func } kind = Leaf;
    int node = 0;
    int x = 0;  // 1-based, Func only
    int y = 0;

    static QueryId leaf(int node) { return QueryId{Leaf, node, 0, 0}; }
    static QueryId func(int node, int x, int y) { return QueryId{Func, node, x, y}; }

    friend bool operator==(const QueryId& a, const QueryId& b) {
        return a.kind == b.kind && a.node == b.node && a.x == b.x && a.y == b.y;
    }
    friend bool operator<(const QueryId& a, const QueryId& b) {
        if (a.node != b.node) return a.node < b.node;
        if (a.kind != b.kind) return a.kind < b.kind;
        if (a.x != b.x) return a.x < b.x;
        return a.y < b.y;
    }
    std::string str() const;
};

/// A full input to TEP^h_2(k): leaf values plus one k x k function table per
/// internal node. Slots live in one flat vector in canonical order: leaves
/// ascending by id, then tables ascending by node id, entries (x,y)
/// lexicographic. All values are 1-based in [k].
class TepInstance {
public:
    TepInstance() = default;
    TepInstance(TreeShape shape, int k);

    const TreeShape& shape() const { return shape_; }
    int k() const { return k_; }

    // m = 2^h - 1 + (k^2 - 1)(2^(h-1) - 1): node values plus non-thrifty
    // entries; identical to leaf slots + table entries.
    int slot_count() const { return (int)slots_.size(); }
    static std::uint64_t slot_count(const TreeShape& shape, int k);

    int leaf(int i) const { return slots_[leaf_index(i)]; }
    int table(int i, int x, int y) const { return slots_[table_index(i, x, y)]; }
    void set_leaf(int i, int v) { slots_[leaf_index(i)] = check_value(v); }
    void set_table(int i, int x, int y, int v) { slots_[table_index(i, x, y)] = check_value(v); }

    int slot(const QueryId& q) const { return slots_[slot_index(q)]; }
    void set_slot(const QueryId& q, int v) { slots_[slot_index(q)] = check_value(v); }

    int slot_index(const QueryId& q) const;
    QueryId slot_query(int index) const;  // inverse of slot_index

    const std::vector<std::uint8_t>& raw() const { return slots_; }
    std::vector<std::uint8_t>& raw() { return slots_; }

    friend bool operator==(const TepInstance& a, const TepInstance& b) {
        return a.shape_ == b.shape_ && a.k_ == b.k_ && a.slots_ == b.slots_;
    }
    friend bool operator!=(const TepInstance& a, const TepInstance& b) { return !(a == b); }
    friend bool operator<(const TepInstance& a, const TepInstance& b) { return a.slots_ < b.slots_; }

private:
    int leaf_index(int i) const;
    int table_index(int i, int x, int y) const;
    int check_value(int v) const;

    TreeShape shape_;
    int k_ = 0;
    std::vector<std::uint8_t> slots_;
};

/// Correct values v_i for every node, bottom-up.
struct NodeValues {
    std::vector<std::uint8_t> values;  // index by node id; [0] unused

    int value(int i) const { return values[i]; }
    int root() const { return values[1]; }
};

NodeValues evaluate(const TepInstance& instance);

// Number of instances, k^m; nullopt if it overflows 64 bits.
std::optional<std::uint64_t> instance_space_size(const TreeShape& shape, int k);

// Instance with canonical index n (row-major over slots, slot 0 most
// significant). Requires the space to fit in 64 bits.
TepInstance instance_from_index(const TreeShape& shape, int k, std::uint64_t n);
std::uint64_t instance_to_index(const TepInstance& instance);

/// Row-major odometer over all k^m instances.
class InstanceEnumerator {
public:
    InstanceEnumerator(TreeShape shape, int k, const Budget& budget = Budget{});
    bool next(TepInstance& out);  // false when exhausted
    std::uint64_t total() const { return total_; }

private:
    TepInstance current_;
    std::uint64_t total_ = 0;
    std::uint64_t emitted_ = 0;
};

TepInstance sample_instance(const TreeShape& shape, int k, std::uint64_t seed);
TepInstance perturb(const TepInstance& instance, const QueryId& query, int value);

// Every instance, in canonical order, calling fn(index, instance). Throws
// budget_error when the space exceeds the cap.
void for_each_instance(const TreeShape& shape, int k, const Budget& budget,
                       const std::function<void(std::uint64_t, const TepInstance&)>& fn);

// Instance JSON: {"h":..,"k":..,"leaves":[...],"tables":{"<id>":[[row x=1],...]}}
std::string instance_to_json(const TepInstance& instance);
TepInstance instance_from_json(const std::string& text);

}  // namespace tep

#endif  // TEP_INSTANCE_HPP_
