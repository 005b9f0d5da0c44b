#include "tep/checkers.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "tep/profile.hpp"

namespace tep {

using nlohmann::json;

json Verdict::to_json() const {
    json j;
    j["property"] = property;
    j["pass"] = pass;
    j["sampled"] = sampled;
    if (!detail.empty()) j["detail"] = detail;
    if (!witness.is_null()) j["witness"] = witness;
    return j;
}

namespace {

json instance_witness(const TepInstance& inst) {
    return json::parse(instance_to_json(inst));
}

json path_ids(const BranchingProgram& bp, const ComputationPath& path) {
    json ids = json::array();
    for (int s : path.states) ids.push_back(bp.state(s).id);
    return ids;
}

// Runs fn over every instance (exhaustive under the cap) or over a seeded
// sample otherwise; returns true when sampled. fn returns false to stop.
bool drive_instances(const TreeShape& shape, int k, const Budget& budget,
                     const std::function<bool(const TepInstance&)>& fn) {
    auto size = instance_space_size(shape, k);
    if (size && *size <= budget.exhaustive_cap) {
        InstanceEnumerator en(shape, k, budget);
        TepInstance inst;
        while (en.next(inst))
            if (!fn(inst)) break;
        return false;
    }
    for (std::uint64_t s = 0; s < budget.sample_count; ++s)
        if (!fn(sample_instance(shape, k, budget.sample_seed + s))) break;
    return true;
}

// Complete computation paths of one instance: the unique one on a
// deterministic program, otherwise full enumeration.
std::vector<ComputationPath> complete_paths(const BranchingProgram& bp, const TepInstance& inst,
                                            const Budget& budget, bool deterministic) {
    if (deterministic) return {run_deterministic(bp, inst)};
    return enumerate_complete_paths(bp, inst, budget);
}

std::vector<std::vector<bool>> descendant_closure(const BranchingProgram& bp) {
    int n = bp.state_count();
    // topological order via DFS postorder on the DAG
    std::vector<int> order;
    std::vector<int> mark(n, 0);
    for (int root = 0; root < n; ++root) {
        if (mark[root]) continue;
        std::vector<std::pair<int, size_t>> stack{{root, 0}};
        mark[root] = 1;
        while (!stack.empty()) {
            auto& [v, ei] = stack.back();
            if (ei < bp.out_edges(v).size()) {
                int to = bp.out_edges(v)[ei++].to;
                if (!mark[to]) {
                    mark[to] = 1;
                    stack.emplace_back(to, 0);
                }
            } else {
                order.push_back(v);
                stack.pop_back();
            }
        }
    }
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (int v : order) {  // postorder: successors already done
        for (const auto& e : bp.out_edges(v)) {
            reach[v][e.to] = true;
            for (int t = 0; t < n; ++t)
                if (reach[e.to][t]) reach[v][t] = true;
        }
    }
    return reach;
}

std::vector<bool> can_reach_output(const BranchingProgram& bp) {
    int n = bp.state_count();
    std::vector<bool> ok(n, false);
    std::vector<std::vector<int>> rev(n);
    std::vector<int> queue;
    for (int i = 0; i < n; ++i) {
        for (const auto& e : bp.out_edges(i)) rev[e.to].push_back(i);
        if (bp.state(i).is_output) {
            ok[i] = true;
            queue.push_back(i);
        }
    }
    while (!queue.empty()) {
        int v = queue.back();
        queue.pop_back();
        for (int u : rev[v])
            if (!ok[u]) {
                ok[u] = true;
                queue.push_back(u);
            }
    }
    return ok;
}

}  // namespace

Verdict computes_tep(const BranchingProgram& bp, const Budget& budget) {
    Verdict v;
    v.property = "computes_tep";
    bool det = bp.is_deterministic();
    v.sampled = drive_instances(bp.shape(), bp.k(), budget, [&](const TepInstance& inst) {
        int want = evaluate(inst).root();
        auto paths = complete_paths(bp, inst, budget, det);
        if (paths.empty()) {
            v.pass = false;
            v.detail = "instance has no complete computation path";
            v.witness = {{"reason", "no_complete_path"}, {"instance", instance_witness(inst)}};
            return false;
        }
        for (const auto& p : paths) {
            int got = bp.state(p.states.back()).output;
            if (got != want) {
                v.pass = false;
                v.detail = "complete path ends at the wrong output";
                v.witness = {{"reason", "wrong_output"},
                             {"instance", instance_witness(inst)},
                             {"path", path_ids(bp, p)},
                             {"expected", want},
                             {"got", got}};
                return false;
            }
        }
        return true;
    });
    return v;
}

Verdict check_thrifty(const BranchingProgram& bp, const Budget& budget) {
    Verdict v;
    v.property = "thrifty";
    bool det = bp.is_deterministic();
    v.sampled = drive_instances(bp.shape(), bp.k(), budget, [&](const TepInstance& inst) {
        NodeValues nv = evaluate(inst);
        for (const auto& p : complete_paths(bp, inst, budget, det)) {
            for (size_t t = 0; t + 1 < p.states.size(); ++t) {
                const BpState& s = bp.state(p.states[t]);
                if (s.query.kind != QueryId::Func) continue;
                int i = s.query.node;
                if (s.query.x != nv.value(bp.shape().left(i)) ||
                    s.query.y != nv.value(bp.shape().right(i))) {
                    v.pass = false;
                    v.detail = "non-thrifty function query on a complete computation path";
                    v.witness = {{"instance", instance_witness(inst)},
                                 {"path", path_ids(bp, p)},
                                 {"state", s.id},
                                 {"query", s.query.str()},
                                 {"thrifty_x", nv.value(bp.shape().left(i))},
                                 {"thrifty_y", nv.value(bp.shape().right(i))}};
                    return false;
                }
            }
        }
        return true;
    });
    return v;
}

Verdict check_syntactic_read_once(const BranchingProgram& bp) {
    Verdict v;
    v.property = "syntactic_read_once";
    auto reach = descendant_closure(bp);
    auto completable = can_reach_output(bp);

    std::map<QueryId, std::vector<int>> by_query;
    for (int i = 0; i < bp.state_count(); ++i)
        if (!bp.state(i).is_output) by_query[bp.state(i).query].push_back(i);

    for (const auto& [q, states] : by_query) {
        for (int a : states)
            for (int b : states) {
                if (a == b || !reach[a][b]) continue;
                if (!completable[b]) continue;  // no source-to-sink path continues
                v.pass = false;
                v.detail = "two states on a common source-to-sink path query " + q.str();
                v.witness = {{"query", q.str()},
                             {"first", bp.state(a).id},
                             {"second", bp.state(b).id}};
                return v;
            }
    }
    return v;
}

namespace {

// DFS over consistent graph-path prefixes. A conflicting edge whose target
// still reaches an output yields a null-path witness.
struct NullPathSearch {
    const BranchingProgram& bp;
    const Budget& budget;
    std::vector<bool> completable;
    std::map<QueryId, int> assignment;
    std::vector<int> states;
    std::vector<int> labels;
    std::uint64_t visited = 0;
    Verdict* verdict = nullptr;

    bool found = false;

    void extend_to_output(int from) {
        // shortest continuation to any output, BFS by parent links
        int n = bp.state_count();
        std::vector<int> parent(n, -2), via(n, 0);
        std::vector<int> queue{from};
        parent[from] = -1;
        int target = -1;
        for (size_t qi = 0; qi < queue.size() && target < 0; ++qi) {
            int v = queue[qi];
            if (bp.state(v).is_output) {
                target = v;
                break;
            }
            for (const auto& e : bp.out_edges(v))
                if (parent[e.to] == -2) {
                    parent[e.to] = v;
                    via[e.to] = e.label;
                    queue.push_back(e.to);
                }
        }
        std::vector<int> tail_states, tail_labels;
        for (int v = target; v != from; v = parent[v]) {
            tail_states.push_back(v);
            tail_labels.push_back(via[v]);
        }
        for (int j = (int)tail_states.size() - 1; j >= 0; --j) {
            states.push_back(tail_states[j]);
            labels.push_back(tail_labels[j]);
        }
    }

    bool dfs(int state) {
        if (++visited > budget.path_cap * 16)
            throw budget_error("null-path search exceeded its budget");
        if (bp.state(state).is_output) return false;
        const QueryId& q = bp.state(state).query;
        auto it = assignment.find(q);
        for (const auto& e : bp.out_edges(state)) {
            if (it != assignment.end() && e.label != it->second) {
                if (!completable[e.to]) continue;
                // inconsistent edge on a completable path: a null-path
                labels.push_back(e.label);
                states.push_back(e.to);
                extend_to_output(e.to);
                found = true;
                return true;
            }
            bool inserted = false;
            if (it == assignment.end()) {
                assignment.emplace(q, e.label);
                inserted = true;
            }
            labels.push_back(e.label);
            states.push_back(e.to);
            if (dfs(e.to)) return true;
            states.pop_back();
            labels.pop_back();
            if (inserted) {
                assignment.erase(q);
                it = assignment.end();
            }
        }
        return false;
    }
};

}  // namespace

Verdict check_null_path_free(const BranchingProgram& bp, const Budget& budget) {
    Verdict v;
    v.property = "null_path_free";
    NullPathSearch search{bp, budget, can_reach_output(bp), {}, {}, {}, 0, &v};
    search.states.push_back(bp.start());
    if (search.dfs(bp.start())) {
        v.pass = false;
        v.detail = "complete graph path assigns two labels to one query";
        json ids = json::array();
        for (int s : search.states) ids.push_back(bp.state(s).id);
        v.witness = {{"path", ids}, {"labels", search.labels}};
    }
    return v;
}

Verdict check_semantic_read_once(const BranchingProgram& bp, const Budget& budget) {
    Verdict v;
    v.property = "semantic_read_once";
    bool det = bp.is_deterministic();
    v.sampled = drive_instances(bp.shape(), bp.k(), budget, [&](const TepInstance& inst) {
        for (const auto& p : complete_paths(bp, inst, budget, det)) {
            std::set<QueryId> seen;
            for (size_t t = 0; t + 1 < p.states.size(); ++t) {
                const QueryId& q = bp.state(p.states[t]).query;
                if (!seen.insert(q).second) {
                    v.pass = false;
                    v.detail = "complete computation path queries " + q.str() + " twice";
                    v.witness = {{"instance", instance_witness(inst)},
                                 {"path", path_ids(bp, p)},
                                 {"query", q.str()}};
                    return false;
                }
            }
        }
        return true;
    });
    return v;
}

// ---------------------------------------------------------------------------
// Witness re-validation

namespace {

bool revalidate_computes(const BranchingProgram& bp, const json& w, const Budget& budget) {
    TepInstance inst = instance_from_json(w.at("instance").dump());
    int want = evaluate(inst).root();
    auto paths = enumerate_complete_paths(bp, inst, budget);
    if (w.at("reason") == "no_complete_path") return paths.empty();
    for (const auto& p : paths)
        if (bp.state(p.states.back()).output != want) return true;
    return false;
}

// Follows recorded state ids, checking each edge exists and is consistent
// with the instance's answers.
bool path_exists_consistent(const BranchingProgram& bp, const TepInstance& inst,
                            const std::vector<int>& ids) {
    if (ids.empty()) return false;
    int cur = bp.index_of_id(ids[0]);
    if (cur != bp.start()) return false;
    for (size_t t = 1; t < ids.size(); ++t) {
        int next = bp.index_of_id(ids[t]);
        if (next < 0) return false;
        int answer = inst.slot(bp.state(cur).query);
        auto succ = bp.successors(cur, answer);
        if (std::find(succ.begin(), succ.end(), next) == succ.end()) return false;
        cur = next;
    }
    return true;
}

bool revalidate_thrifty(const BranchingProgram& bp, const json& w) {
    TepInstance inst = instance_from_json(w.at("instance").dump());
    NodeValues nv = evaluate(inst);
    auto ids = w.at("path").get<std::vector<int>>();
    if (!path_exists_consistent(bp, inst, ids)) return false;
    if (!bp.state(bp.index_of_id(ids.back())).is_output) return false;
    int state = bp.index_of_id(w.at("state").get<int>());
    if (state < 0 || bp.state(state).query.kind != QueryId::Func) return false;
    const QueryId& q = bp.state(state).query;
    return q.x != nv.value(bp.shape().left(q.node)) || q.y != nv.value(bp.shape().right(q.node));
}

bool revalidate_syntactic(const BranchingProgram& bp, const json& w) {
    int a = bp.index_of_id(w.at("first").get<int>());
    int b = bp.index_of_id(w.at("second").get<int>());
    if (a < 0 || b < 0 || a == b) return false;
    if (bp.state(a).is_output || bp.state(b).is_output) return false;
    if (!(bp.state(a).query == bp.state(b).query)) return false;
    auto reach = descendant_closure(bp);
    return reach[a][b] && can_reach_output(bp)[b];
}

bool revalidate_null_path(const BranchingProgram& bp, const json& w) {
    auto ids = w.at("path").get<std::vector<int>>();
    auto labels = w.at("labels").get<std::vector<int>>();
    if (ids.size() != labels.size() + 1 || ids.empty()) return false;
    int cur = bp.index_of_id(ids[0]);
    if (cur != bp.start()) return false;
    std::map<QueryId, std::set<int>> taken;
    for (size_t t = 0; t < labels.size(); ++t) {
        int next = bp.index_of_id(ids[t + 1]);
        if (next < 0 || bp.state(cur).is_output) return false;
        auto succ = bp.successors(cur, labels[t]);
        if (std::find(succ.begin(), succ.end(), next) == succ.end()) return false;
        taken[bp.state(cur).query].insert(labels[t]);
        cur = next;
    }
    if (!bp.state(cur).is_output) return false;
    for (const auto& [q, set] : taken)
        if (set.size() > 1) return true;
    return false;
}

bool revalidate_semantic(const BranchingProgram& bp, const json& w) {
    TepInstance inst = instance_from_json(w.at("instance").dump());
    auto ids = w.at("path").get<std::vector<int>>();
    if (!path_exists_consistent(bp, inst, ids)) return false;
    if (!bp.state(bp.index_of_id(ids.back())).is_output) return false;
    std::set<QueryId> seen;
    for (size_t t = 0; t + 1 < ids.size(); ++t)
        if (!seen.insert(bp.state(bp.index_of_id(ids[t])).query).second) return true;
    return false;
}

}  // namespace

bool revalidate_witness(const BranchingProgram& bp, const Verdict& verdict, const Budget& budget) {
    if (verdict.pass || verdict.witness.is_null()) return false;
    const json& w = verdict.witness;
    if (verdict.property == "computes_tep") return revalidate_computes(bp, w, budget);
    if (verdict.property == "thrifty") return revalidate_thrifty(bp, w);
    if (verdict.property == "syntactic_read_once") return revalidate_syntactic(bp, w);
    if (verdict.property == "null_path_free") return revalidate_null_path(bp, w);
    if (verdict.property == "semantic_read_once") return revalidate_semantic(bp, w);
    if (verdict.property == "node_independent" || verdict.property == "bitwise_independent")
        return revalidate_independence_witness(bp, verdict, budget);
    if (verdict.property == "pebble_soundness") {
        // genuine iff the instance completes through the state with the
        // recorded value while the state's A-set is not that singleton
        StateValueProfile profile = reach_sets(bp, budget);
        TepInstance inst = instance_from_json(w.at("instance").dump());
        int s = bp.index_of_id(w.at("state").get<int>());
        int node = w.at("node").get<int>();
        int value = w.at("value").get<int>();
        if (s < 0) return false;
        return instance_reach(bp, inst).through[s] && evaluate(inst).value(node) == value &&
               profile.A[s][node] != (1u << (value - 1));
    }
    return false;
}

}  // namespace tep
