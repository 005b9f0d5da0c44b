#include "tep/profile.hpp"

namespace tep {

using nlohmann::json;

LogK StateValueProfile::black_value(int state, int node) const {
    return LogK(k, (unsigned long long)k, (unsigned long long)r_size(state, node));
}
LogK StateValueProfile::white_value(int state, int node) const {
    return LogK(k, (unsigned long long)r_size(state, node), (unsigned long long)a_size(state, node));
}
LogK StateValueProfile::node_value(int state, int node) const {
    return LogK(k, (unsigned long long)k, (unsigned long long)a_size(state, node));
}
LogK StateValueProfile::state_value(int state) const {
    LogK total(k, 1, 1);
    for (int i = 1; i <= shape.node_count(); ++i) total = total + node_value(state, i);
    return total;
}

InstanceReach instance_reach(const BranchingProgram& bp, const TepInstance& instance) {
    int n = bp.state_count();
    InstanceReach out{std::vector<bool>(n, false), std::vector<bool>(n, false)};

    // forward closure over instance-consistent edges
    std::vector<int> queue{bp.start()};
    out.reached[bp.start()] = true;
    for (size_t qi = 0; qi < queue.size(); ++qi) {
        int v = queue[qi];
        if (bp.state(v).is_output) continue;
        int answer = instance.slot(bp.state(v).query);
        for (int to : bp.successors(v, answer))
            if (!out.reached[to]) {
                out.reached[to] = true;
                queue.push_back(to);
            }
    }

    // backward: states with a consistent continuation to an output
    std::vector<bool> completes(n, false);
    std::vector<std::vector<int>> rev(n);
    std::vector<int> bqueue;
    for (int v = 0; v < n; ++v) {
        if (bp.state(v).is_output) {
            completes[v] = true;
            bqueue.push_back(v);
            continue;
        }
        int answer = instance.slot(bp.state(v).query);
        for (int to : bp.successors(v, answer)) rev[to].push_back(v);
    }
    for (size_t qi = 0; qi < bqueue.size(); ++qi)
        for (int u : rev[bqueue[qi]])
            if (!completes[u]) {
                completes[u] = true;
                bqueue.push_back(u);
            }

    for (int v = 0; v < n; ++v) out.through[v] = out.reached[v] && completes[v];
    return out;
}

namespace {

bool drive(const BranchingProgram& bp, const Budget& budget,
           const std::function<bool(const TepInstance&)>& fn, std::uint64_t& driven) {
    auto size = instance_space_size(bp.shape(), bp.k());
    driven = 0;
    if (size && *size <= budget.exhaustive_cap) {
        InstanceEnumerator en(bp.shape(), bp.k(), budget);
        TepInstance inst;
        while (en.next(inst)) {
            ++driven;
            if (!fn(inst)) break;
        }
        return false;
    }
    for (std::uint64_t s = 0; s < budget.sample_count; ++s) {
        ++driven;
        if (!fn(sample_instance(bp.shape(), bp.k(), budget.sample_seed + s))) break;
    }
    return true;
}

}  // namespace

StateValueProfile reach_sets(const BranchingProgram& bp, const Budget& budget) {
    StateValueProfile prof;
    prof.shape = bp.shape();
    prof.k = bp.k();
    int n = bp.state_count();
    int nodes = bp.shape().node_count();
    prof.R.assign(n, std::vector<std::uint32_t>(nodes + 1, 0));
    prof.A.assign(n, std::vector<std::uint32_t>(nodes + 1, 0));
    prof.reach_count.assign(n, 0);
    prof.through_count.assign(n, 0);

    prof.sampled = drive(bp, budget, [&](const TepInstance& inst) {
        NodeValues nv = evaluate(inst);
        InstanceReach ir = instance_reach(bp, inst);
        for (int s = 0; s < n; ++s) {
            if (ir.reached[s]) {
                ++prof.reach_count[s];
                for (int i = 1; i <= nodes; ++i) prof.R[s][i] |= 1u << (nv.value(i) - 1);
            }
            if (ir.through[s]) {
                ++prof.through_count[s];
                for (int i = 1; i <= nodes; ++i) prof.A[s][i] |= 1u << (nv.value(i) - 1);
            }
        }
        return true;
    }, prof.instances_driven);
    return prof;
}

namespace {

json instance_witness(const TepInstance& inst) { return json::parse(instance_to_json(inst)); }

bool in_rectangle(const std::vector<std::uint32_t>& sets, const NodeValues& nv, int nodes) {
    for (int i = 1; i <= nodes; ++i)
        if (!(sets[i] >> (nv.value(i) - 1) & 1)) return false;
    return true;
}

}  // namespace

Verdict check_node_independent(const BranchingProgram& bp, const StateValueProfile& profile,
                               const Budget& budget) {
    Verdict v;
    v.property = "node_independent";
    int n = bp.state_count();
    int nodes = bp.shape().node_count();
    std::uint64_t driven = 0;
    bool sampled = drive(bp, budget, [&](const TepInstance& inst) {
        NodeValues nv = evaluate(inst);
        InstanceReach ir = instance_reach(bp, inst);
        for (int s = 0; s < n; ++s) {
            bool rect_r = in_rectangle(profile.R[s], nv, nodes);
            bool rect_a = in_rectangle(profile.A[s], nv, nodes);
            // forward directions hold by construction of the profile
            if (rect_r != ir.reached[s] || rect_a != ir.through[s]) {
                v.pass = false;
                bool reach_case = rect_r != ir.reached[s];
                v.detail = reach_case ? "instance inside the R-rectangle does not reach the state"
                                      : "instance inside the A-rectangle has no complete path through";
                v.witness = {{"state", bp.state(s).id},
                             {"condition", reach_case ? "reach" : "complete"},
                             {"instance", instance_witness(inst)}};
                return false;
            }
        }
        return true;
    }, driven);
    v.sampled = sampled || profile.sampled;
    return v;
}

namespace {

int log2_exact(int k) {
    int l = 0;
    while ((1 << l) < k) ++l;
    return (1 << l) == k ? l : -1;
}

// closure of a value mask under independent bit choices; values encode as v-1
std::uint32_t bit_product_closure(std::uint32_t mask, int bits) {
    std::uint32_t per_bit[32] = {};  // per position: set of observed bits (1=0-bit seen, 2=1-bit seen)
    for (int v = 0; v < 32; ++v) {
        if (!(mask >> v & 1)) continue;
        for (int l = 0; l < bits; ++l) per_bit[l] |= (v >> l & 1) ? 2u : 1u;
    }
    std::uint32_t closure = 0;
    int total = 1 << bits;
    for (int v = 0; v < total; ++v) {
        bool ok = mask != 0;
        for (int l = 0; l < bits && ok; ++l)
            if (!(per_bit[l] >> (v >> l & 1) & 1)) ok = false;
        if (ok) closure |= 1u << v;
    }
    return closure;
}

}  // namespace

Verdict check_bitwise_independent(const BranchingProgram& bp, const StateValueProfile& profile,
                                  const Budget& budget) {
    int bits = log2_exact(bp.k());
    if (bits < 0) throw std::invalid_argument("bitwise-independence requires k to be a power of 2");

    Verdict v = check_node_independent(bp, profile, budget);
    v.property = "bitwise_independent";
    if (!v.pass) return v;

    for (int s = 0; s < bp.state_count(); ++s) {
        for (int i = 1; i <= bp.shape().node_count(); ++i) {
            for (auto [name, mask] : {std::pair{"R", profile.R[s][i]}, {"A", profile.A[s][i]}}) {
                std::uint32_t closure = bit_product_closure(mask, bits);
                if (closure != mask) {
                    v.pass = false;
                    v.detail = std::string(name) + " set is not a product of its bit projections";
                    v.witness = {{"state", bp.state(s).id},
                                 {"node", i},
                                 {"set", name},
                                 {"mask", mask},
                                 {"closure", closure}};
                    return v;
                }
            }
        }
    }
    return v;
}

ThroughCount count_inputs_through(const BranchingProgram& bp, int state,
                                  const StateValueProfile& profile) {
    if (profile.sampled)
        throw budget_error("count_inputs_through requires an exhaustive profile");
    ThroughCount out;
    out.count = profile.through_count[state];

    // bound = k^(m - (2^h - 1)) * prod_i |A(i)|  (exact form of k^(m - p))
    int nodes = bp.shape().node_count();
    std::uint64_t m = TepInstance::slot_count(bp.shape(), bp.k());
    unsigned __int128 bound = 1;
    for (std::uint64_t e = 0; e < m - (std::uint64_t)nodes; ++e)
        bound = LogK::mul_checked(bound, (unsigned)bp.k());
    for (int i = 1; i <= nodes; ++i)
        bound = LogK::mul_checked(bound, (unsigned)profile.a_size(state, i));
    out.bound = (std::uint64_t)bound;
    out.bound_holds = out.count <= bound;
    return out;
}

bool revalidate_independence_witness(const BranchingProgram& bp, const Verdict& verdict,
                                     const Budget& budget) {
    if (verdict.pass || verdict.witness.is_null()) return false;
    const json& w = verdict.witness;
    if (w.contains("set")) {
        // bit-product witness: recompute the closure mismatch
        StateValueProfile profile = reach_sets(bp, budget);
        int s = bp.index_of_id(w.at("state").get<int>());
        int i = w.at("node").get<int>();
        int bits = log2_exact(bp.k());
        if (s < 0 || bits < 0) return false;
        std::uint32_t mask =
            w.at("set") == "R" ? profile.R[s][i] : profile.A[s][i];
        return bit_product_closure(mask, bits) != mask;
    }
    StateValueProfile profile = reach_sets(bp, budget);
    TepInstance inst = instance_from_json(w.at("instance").dump());
    NodeValues nv = evaluate(inst);
    InstanceReach ir = instance_reach(bp, inst);
    int s = bp.index_of_id(w.at("state").get<int>());
    if (s < 0) return false;
    if (w.at("condition") == "reach")
        return in_rectangle(profile.R[s], nv, bp.shape().node_count()) != ir.reached[s];
    return in_rectangle(profile.A[s], nv, bp.shape().node_count()) != ir.through[s];
}

}  // namespace tep
