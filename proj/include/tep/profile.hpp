#ifndef TEP_PROFILE_HPP_
#define TEP_PROFILE_HPP_

#include <cstdint>
#include <vector>

#include "tep/branching_program.hpp"
#include "tep/checkers.hpp"
#include "tep/util.hpp"

namespace tep {

/// Per-state, per-node reach/accept value sets of §6:
///   R(i) = correct values of node i over instances with a computation path
///          reaching the state,
///   A(i) = the same over instances with a complete computation path through
///          the state,
/// plus instance counts. Pebble values are ratios of the set sizes, exposed
/// exactly (never as floating logs).
struct StateValueProfile {
    TreeShape shape;
    int k = 0;
    bool sampled = false;
    std::uint64_t instances_driven = 0;

    // [state][node] bitmask; bit v-1 set when value v occurs
    std::vector<std::vector<std::uint32_t>> R, A;
    std::vector<std::uint64_t> reach_count, through_count;

    int r_size(int state, int node) const { return __builtin_popcount(R[state][node]); }
    int a_size(int state, int node) const { return __builtin_popcount(A[state][node]); }
    bool on_complete_path(int state) const { return through_count[state] > 0; }

    // b = log_k(k/|R|), w = log_k(|R|/|A|), p(i) = log_k(k/|A|)
    LogK black_value(int state, int node) const;
    LogK white_value(int state, int node) const;
    LogK node_value(int state, int node) const;
    LogK state_value(int state) const;  // p_gamma, sum over nodes
};

// Brute-force enumeration of R/A over all instances (sampled past the cap,
// flagged as such).
StateValueProfile reach_sets(const BranchingProgram& bp, const Budget& budget = Budget{});

// Rectangle conditions of node-independence, both directions, every state.
Verdict check_node_independent(const BranchingProgram& bp, const StateValueProfile& profile,
                               const Budget& budget = Budget{});

// Node-independence plus bit-product structure of every R/A set. Requires k
// a power of two.
Verdict check_bitwise_independent(const BranchingProgram& bp, const StateValueProfile& profile,
                                  const Budget& budget = Budget{});

struct ThroughCount {
    std::uint64_t count = 0;       // instances with a complete path through the state
    bool bound_holds = false;      // count <= k^(m - p_gamma)
    std::uint64_t bound = 0;       // k^(m - (2^h - 1)) * prod |A(i)|, exact
};

// Exact census for one state with the Prop bi_count bound.
ThroughCount count_inputs_through(const BranchingProgram& bp, int state,
                                  const StateValueProfile& profile);

bool revalidate_independence_witness(const BranchingProgram& bp, const Verdict& verdict,
                                     const Budget& budget = Budget{});

// Per-instance reach/through state sets, shared with the checkers.
struct InstanceReach {
    std::vector<bool> reached;   // consistent path from the start exists
    std::vector<bool> through;   // complete computation path through the state exists
};
InstanceReach instance_reach(const BranchingProgram& bp, const TepInstance& instance);

}  // namespace tep

#endif  // TEP_PROFILE_HPP_
