#ifndef TEP_BRANCHING_PROGRAM_HPP_
#define TEP_BRANCHING_PROGRAM_HPP_

#include <string>
#include <vector>

#include "tep/instance.hpp"
#include "tep/tree.hpp"
#include "tep/util.hpp"

namespace tep {

/// k-way branching program over TEP^h_2(k): a labelled DAG of query states
/// with k output sinks and a single start state. States are addressed by
/// dense index; the id field carries the external (JSON) identity.
struct BpState {
    int id = 0;
    bool is_output = false;
    QueryId query;    // valid when !is_output
    int output = 0;   // value in [k] when is_output
};

struct BpEdge {
    int label = 0;  // answer in [k]
    int to = 0;     // state index
};

struct LayerInfo {
    int step = 0;
    int pebbles = 0;  // whole pebbles on the configuration queried at this layer
    int width = 0;
};

class BranchingProgram {
public:
    BranchingProgram() = default;
    BranchingProgram(TreeShape shape, int k) : shape_(shape), k_(k) {}

    const TreeShape& shape() const { return shape_; }
    int k() const { return k_; }

    int add_query_state(int id, const QueryId& q);
    int add_output_state(int id, int value);
    void add_edge(int from, int label, int to);
    void set_start(int index) { start_ = index; }

    int start() const { return start_; }
    int state_count() const { return (int)states_.size(); }
    const BpState& state(int index) const { return states_[index]; }
    const std::vector<BpEdge>& out_edges(int index) const { return edges_[index]; }

    // Edges consistent with one concrete answer, in canonical
    // (label, successor id) order.
    std::vector<int> successors(int index, int answer) const;

    int index_of_id(int id) const;  // -1 when absent

    // exactly k out-edges with distinct labels at every non-output state
    bool is_deterministic() const;

    // sorts edge lists into canonical order; call after building
    void finalize();

    std::vector<LayerInfo> layers;           // present on compiled programs
    bool claims_deterministic = false;       // optional flag from JSON
    bool has_determinism_claim = false;

private:
    TreeShape shape_;
    int k_ = 0;
    int start_ = 0;
    std::vector<BpState> states_;
    std::vector<std::vector<BpEdge>> edges_;
};

/// Path s0 -(a1)-> s1 ... ; complete when it ends at an output state.
struct ComputationPath {
    std::vector<int> states;  // state indices
    std::vector<int> labels;  // labels.size() == states.size() - 1
    bool complete = false;

    int length() const { return (int)states.size(); }
};

struct StructuralIssue {
    std::string what;
    std::vector<int> state_ids;
};

struct StructuralReport {
    bool acyclic = true;
    bool single_source = true;
    bool outputs_ok = true;
    bool labels_ok = true;
    bool determinism_ok = true;  // claimed flag matches structure
    bool deterministic = false;  // structural determinism
    std::vector<StructuralIssue> issues;

    bool valid() const {
        return acyclic && single_source && outputs_ok && labels_ok && determinism_ok;
    }
};

StructuralReport validate_bp(const BranchingProgram& bp);

// The unique complete path of a deterministic program on an instance.
ComputationPath run_deterministic(const BranchingProgram& bp, const TepInstance& instance);

// All complete paths consistent with the instance; empty means the program
// rejects it. Throws budget_error past budget.path_cap paths.
std::vector<ComputationPath> enumerate_complete_paths(const BranchingProgram& bp,
                                                      const TepInstance& instance,
                                                      const Budget& budget = Budget{});

// The lexicographically least complete path under (label, successor id)
// order at each branch; requires one to exist.
ComputationPath canonical_path(const BranchingProgram& bp, const TepInstance& instance,
                               const Budget& budget = Budget{});

std::string bp_to_json(const BranchingProgram& bp);
BranchingProgram bp_from_json(const std::string& text);
std::string bp_to_dot(const BranchingProgram& bp);

}  // namespace tep

#endif  // TEP_BRANCHING_PROGRAM_HPP_
