#ifndef TEP_TRACE_HPP_
#define TEP_TRACE_HPP_

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tep/branching_program.hpp"
#include "tep/checkers.hpp"
#include "tep/pebbling.hpp"
#include "tep/profile.hpp"

namespace tep {

/// An analysis operation hit a condition the paper's propositions rule out
/// for the claimed restriction; carries structured context, never patched
/// over.
struct analysis_error : std::runtime_error {
    nlohmann::json context;
    analysis_error(const std::string& what, nlohmann::json ctx)
        : std::runtime_error(what), context(std::move(ctx)) {}
};

// ---------------------------------------------------------------------------
// §3: deterministic thrifty pipeline

/// node id -> position (index into path.states) of its critical state
struct CriticalMap {
    std::vector<int> position;  // indexed by node id; -1 = missing

    int at(int node) const { return position[node]; }
};

CriticalMap det_thrifty_critical_states(const BranchingProgram& bp, const ComputationPath& path);

// One black move per critical state, in path order; markers associate each
// configuration with a path position (the final root configuration with the
// output state).
PebbleSequence det_thrifty_pebbling(const BranchingProgram& bp, const ComputationPath& path,
                                    const CriticalMap& critical);

// First path position whose associated configuration costs >= threshold.
int supercritical_position(const PebbleSequence& seq, const Rat& threshold);

/// §3 tag (gamma, v, x): v = correct node values except the first h learned
/// after gamma (u1 = unlearned-but-queried in first-occurrence order, u2 =
/// the rest ascending); x = non-thrifty slots in canonical order.
struct Tag {
    int gamma_state_id = 0;
    std::vector<std::uint8_t> v;
    std::vector<std::uint8_t> x;

    friend bool operator<(const Tag& a, const Tag& b) {
        if (a.gamma_state_id != b.gamma_state_id) return a.gamma_state_id < b.gamma_state_id;
        if (a.v != b.v) return a.v < b.v;
        return a.x < b.x;
    }
    friend bool operator==(const Tag& a, const Tag& b) {
        return a.gamma_state_id == b.gamma_state_id && a.v == b.v && a.x == b.x;
    }
};

Tag det_thrifty_tag(const BranchingProgram& bp, const TepInstance& instance,
                    const ComputationPath& path);
TepInstance det_thrifty_untag(const BranchingProgram& bp, const Tag& tag);

// ---------------------------------------------------------------------------
// §4: non-deterministic read-once thrifty pipeline

enum class RoMode { Syntactic, NullPathFree };

// White pebbles mark guesses, blacks verified values; rules (1), (2a), (2b)
// per queried node, applied at every state (Syntactic) or only at each
// node's first query (NullPathFree). The appended final move removes the
// root pebble.
PebbleSequence ro_thrifty_bw_pebbling(const BranchingProgram& bp, const ComputationPath& path,
                                      RoMode mode);

// Lemma rot_pebbles as a checker: values of pebbled nodes are determined by
// the state alone (A_gamma singleton and matching).
Verdict check_pebble_soundness(
    const BranchingProgram& bp,
    const std::function<PebbleSequence(const BranchingProgram&, const ComputationPath&)>& pebbling_fn,
    const Budget& budget = Budget{});

/// §4.3 semantic tag (u, gamma, x): u = Lehmer code of the path's node
/// permutation; x = all input slots except the correct values of the nodes
/// pebbled at gamma.
struct SemTag {
    std::uint64_t permutation_rank = 0;
    int gamma_state_id = 0;
    std::vector<std::uint8_t> x;

    friend bool operator<(const SemTag& a, const SemTag& b) {
        if (a.permutation_rank != b.permutation_rank) return a.permutation_rank < b.permutation_rank;
        if (a.gamma_state_id != b.gamma_state_id) return a.gamma_state_id < b.gamma_state_id;
        return a.x < b.x;
    }
};

SemTag semantic_ro_tag(const BranchingProgram& bp, const TepInstance& instance,
                       const ComputationPath& path);
// Inverts the tag; pebbled-node values are read off the profile's singleton
// A-sets (Lemma rot_pebbles).
TepInstance semantic_ro_untag(const BranchingProgram& bp, const SemTag& tag,
                              const StateValueProfile& profile);

std::uint64_t lehmer_rank(const std::vector<int>& order);
std::vector<int> lehmer_unrank(std::uint64_t rank, std::vector<int> sorted_ids);

// ---------------------------------------------------------------------------
// §5: deterministic read-once pipeline (Algorithm 1)

struct GreyPebble {
    int node = 0;        // pebbled node i
    int a = 0, b = 0;    // antecedent [2i,a] ^ [2i+1,b]
    int c = 0;           // consequent [i,c]

    friend bool operator<(const GreyPebble& p, const GreyPebble& q) {
        if (p.node != q.node) return p.node < q.node;
        if (p.a != q.a) return p.a < q.a;
        if (p.b != q.b) return p.b < q.b;
        return p.c < q.c;
    }
    friend bool operator==(const GreyPebble& p, const GreyPebble& q) {
        return p.node == q.node && p.a == q.a && p.b == q.b && p.c == q.c;
    }
};

struct GreyBlackConfig {
    std::vector<int> black;     // per node: 0 = none, else the pebble's value
    std::set<GreyPebble> grey;

    int pebble_count() const {
        int n = 0;
        for (int v : black) n += v != 0;
        return n + (int)grey.size();
    }
    friend bool operator==(const GreyBlackConfig& x, const GreyBlackConfig& y) {
        return x.black == y.black && x.grey == y.grey;
    }
};

/// Per-state memory snapshots plus the full move-by-move configuration list
/// (needed for the stripped-black validation of Lemma valid).
struct AnalysisTrace {
    TreeShape shape;
    int k = 0;
    std::vector<std::uint32_t> ranges;           // [pos * (nodes+1) + node]
    std::vector<std::int8_t> classes;            // [(pos * (nodes+1) + node) * k + (v-1)]
    std::vector<bool> active;                    // [pos * (nodes+1) + node]
    std::vector<bool> compl_queried;             // [pos * (nodes+1) + node]
    std::vector<GreyBlackConfig> intermediate;   // config after every pebble move
    std::vector<int> assoc_config;               // per path position -> index into intermediate
    std::vector<int> relevant_queries;           // [pos * (nodes+1) + node] count before pos

    std::uint32_t range_at(int pos, int node) const;
    bool active_at(int pos, int node) const;
    int class_of(int pos, int node, int value) const;
    const GreyBlackConfig& config_at(int pos) const { return intermediate[assoc_config[pos]]; }
};

AnalysisTrace algorithm1_trace(const BranchingProgram& bp, const TepInstance& instance,
                               const ComputationPath& path);

// No active node accumulates k-1 relevant queries at any state.
bool check_efficient(const BranchingProgram& bp, const ComputationPath& path,
                     const AnalysisTrace& trace);

// First path position whose associated configuration has >= h pebbles
// (black or grey); -1 when none exists (reported, not asserted: the paper's
// premise needs k >= h+1).
int ro_det_supercritical(const ComputationPath& path, const AnalysisTrace& trace);

// Black configurations with greys stripped, deduplicated, as a black-game
// sequence (Lemma valid: valid for efficient paths).
PebbleSequence stripped_black_sequence(const TreeShape& shape, const AnalysisTrace& trace);

// ---------------------------------------------------------------------------
// §6/§7: state-pebble-value schedules

enum class IndependentVariant { BitwiseThrifty, NodeIndependentRO };

// Intermediate moves (1),(2a),(2b),(3) — with (2') for the read-once variant
// — realizing the state pebble values along the path as a fractional
// pebbling. Illegal transitions raise analysis_error with the violated
// proposition named.
PebbleSequence independent_schedule(const BranchingProgram& bp, const ComputationPath& path,
                                    const StateValueProfile& profile, IndependentVariant variant);

struct SupercriticalInfo {
    int position = -1;          // path position
    bool used_fallback = false; // §7 fallback inequality
    std::string effective;      // certified bound, printable
};

SupercriticalInfo independent_supercritical(const BranchingProgram& bp,
                                            const TepInstance& instance,
                                            const ComputationPath& path,
                                            const StateValueProfile& profile,
                                            IndependentVariant variant);

// ---------------------------------------------------------------------------
// bottleneck censuses

struct Census {
    std::map<int, std::uint64_t> bucket;  // state id -> instances
    std::uint64_t max_bucket = 0;
    std::uint64_t instance_total = 0;
    Rat exponent;                          // e
    bool bound_holds = false;              // max <= k^(m-e)
    bool floor_holds = false;              // #buckets >= k^e
    std::string bound;

    nlohmann::json to_json() const;
};

// Maps every instance to its supercritical state (resolver returns a state
// index) and checks the counting bound max <= k^(m-e).
Census bottleneck_census(
    const BranchingProgram& bp, const Rat& exponent,
    const std::function<int(const BranchingProgram&, const TepInstance&, const ComputationPath&)>&
        supercritical,
    const Budget& budget = Budget{});

// Census resolvers for the named pipelines.
int det_thrifty_supercritical_state(const BranchingProgram& bp, const TepInstance& instance,
                                    const ComputationPath& path);
int ro_thrifty_supercritical_state(const BranchingProgram& bp, const TepInstance& instance,
                                   const ComputationPath& path, RoMode mode);
int algorithm1_supercritical_state(const BranchingProgram& bp, const TepInstance& instance,
                                   const ComputationPath& path);

// Lemma ident_config, empirically: paths sharing a state where every active
// node has a gap on both sides carry identical configurations up to grey
// consequent equivalence.
Verdict check_ident_config(const BranchingProgram& bp, const Budget& budget = Budget{});

// trace JSON for one path (states, memory snapshots, configurations,
// supercritical marker)
std::string trace_to_json(const BranchingProgram& bp, const TepInstance& instance,
                          const ComputationPath& path, const AnalysisTrace& trace);

}  // namespace tep

#endif  // TEP_TRACE_HPP_
