#include "tep/branching_program.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include <json.hpp>

namespace tep {

using nlohmann::json;

int BranchingProgram::add_query_state(int id, const QueryId& q) {
    BpState s;
    s.id = id;
    s.query = q;
    states_.push_back(s);
    edges_.emplace_back();
    return (int)states_.size() - 1;
}

int BranchingProgram::add_output_state(int id, int value) {
    BpState s;
    s.id = id;
    s.is_output = true;
    s.output = value;
    states_.push_back(s);
    edges_.emplace_back();
    return (int)states_.size() - 1;
}

void BranchingProgram::add_edge(int from, int label, int to) {
    edges_[from].push_back(BpEdge{label, to});
}

std::vector<int> BranchingProgram::successors(int index, int answer) const {
    std::vector<int> out;
    for (const auto& e : edges_[index])
        if (e.label == answer) out.push_back(e.to);
    return out;
}

int BranchingProgram::index_of_id(int id) const {
    for (int i = 0; i < (int)states_.size(); ++i)
        if (states_[i].id == id) return i;
    return -1;
}

bool BranchingProgram::is_deterministic() const {
    for (int i = 0; i < (int)states_.size(); ++i) {
        if (states_[i].is_output) continue;
        if ((int)edges_[i].size() != k_) return false;
        std::vector<bool> seen(k_ + 1, false);
        for (const auto& e : edges_[i]) {
            if (e.label < 1 || e.label > k_ || seen[e.label]) return false;
            seen[e.label] = true;
        }
    }
    return true;
}

void BranchingProgram::finalize() {
    for (auto& outs : edges_)
        std::sort(outs.begin(), outs.end(), [&](const BpEdge& a, const BpEdge& b) {
            if (a.label != b.label) return a.label < b.label;
            return states_[a.to].id < states_[b.to].id;
        });
}

StructuralReport validate_bp(const BranchingProgram& bp) {
    StructuralReport rep;
    int n = bp.state_count();
    if (n == 0) {
        rep.outputs_ok = false;
        rep.issues.push_back({"program has no states", {}});
        return rep;
    }

    // outputs: exactly k, distinct values 1..k, no out-edges
    std::vector<int> output_seen(bp.k() + 1, 0);
    int output_count = 0;
    for (int i = 0; i < n; ++i) {
        const BpState& s = bp.state(i);
        if (s.is_output) {
            ++output_count;
            if (s.output < 1 || s.output > bp.k()) {
                rep.outputs_ok = false;
                rep.issues.push_back({"output value out of [k]", {s.id}});
            } else if (output_seen[s.output]++) {
                rep.outputs_ok = false;
                rep.issues.push_back({"duplicate output value", {s.id}});
            }
            if (!bp.out_edges(i).empty()) {
                rep.outputs_ok = false;
                rep.issues.push_back({"output state has out-edges", {s.id}});
            }
        }
    }
    if (output_count != bp.k()) {
        rep.outputs_ok = false;
        rep.issues.push_back({"program must have exactly k output states", {}});
    }

    // label well-formedness
    for (int i = 0; i < n; ++i) {
        const BpState& s = bp.state(i);
        if (!s.is_output) {
            const QueryId& q = s.query;
            bool ok = q.kind == QueryId::Leaf
                          ? bp.shape().is_leaf(q.node)
                          : bp.shape().is_internal(q.node) && q.x >= 1 && q.x <= bp.k() &&
                                q.y >= 1 && q.y <= bp.k();
            if (!ok) {
                rep.labels_ok = false;
                rep.issues.push_back({"malformed query " + q.str(), {s.id}});
            }
        }
        for (const auto& e : bp.out_edges(i)) {
            if (e.label < 1 || e.label > bp.k()) {
                rep.labels_ok = false;
                rep.issues.push_back({"edge label out of [k]", {s.id}});
            }
            if (e.to < 0 || e.to >= n) {
                rep.labels_ok = false;
                rep.issues.push_back({"edge target out of range", {s.id}});
            }
        }
    }

    // acyclicity via iterative DFS coloring
    {
        std::vector<int> color(n, 0);  // 0 white, 1 grey, 2 black
        for (int root = 0; root < n && rep.acyclic; ++root) {
            if (color[root]) continue;
            std::vector<std::pair<int, size_t>> stack{{root, 0}};
            color[root] = 1;
            while (!stack.empty()) {
                auto& [v, ei] = stack.back();
                if (ei < bp.out_edges(v).size()) {
                    int to = bp.out_edges(v)[ei++].to;
                    if (color[to] == 1) {
                        rep.acyclic = false;
                        rep.issues.push_back({"cycle through states", {bp.state(v).id, bp.state(to).id}});
                        break;
                    }
                    if (color[to] == 0) {
                        color[to] = 1;
                        stack.emplace_back(to, 0);
                    }
                } else {
                    color[v] = 2;
                    stack.pop_back();
                }
            }
        }
    }

    // single source, and it must be the declared start state
    {
        std::vector<int> indegree(n, 0);
        for (int i = 0; i < n; ++i)
            for (const auto& e : bp.out_edges(i)) ++indegree[e.to];
        std::vector<int> sources;
        for (int i = 0; i < n; ++i)
            if (indegree[i] == 0 && !bp.state(i).is_output) sources.push_back(i);
        if (sources.size() != 1 || sources[0] != bp.start()) {
            rep.single_source = false;
            std::vector<int> ids;
            for (int s : sources) ids.push_back(bp.state(s).id);
            rep.issues.push_back({"program must have exactly one source, the start state", ids});
        }
        if (indegree[bp.start()] != 0) {
            rep.single_source = false;
            rep.issues.push_back({"start state has incoming edges", {bp.state(bp.start()).id}});
        }
    }

    rep.deterministic = bp.is_deterministic();
    if (bp.has_determinism_claim && bp.claims_deterministic && !rep.deterministic) {
        rep.determinism_ok = false;
        for (int i = 0; i < n; ++i) {
            const BpState& s = bp.state(i);
            if (s.is_output) continue;
            std::vector<int> count(bp.k() + 1, 0);
            for (const auto& e : bp.out_edges(i)) ++count[e.label];
            bool bad = (int)bp.out_edges(i).size() != bp.k();
            for (int a = 1; a <= bp.k(); ++a) bad = bad || count[a] != 1;
            if (bad) rep.issues.push_back({"state violates determinism", {s.id}});
        }
    }
    return rep;
}

ComputationPath run_deterministic(const BranchingProgram& bp, const TepInstance& instance) {
    if (!bp.is_deterministic())
        throw std::invalid_argument("run_deterministic requires a deterministic program");
    ComputationPath path;
    int cur = bp.start();
    path.states.push_back(cur);
    while (!bp.state(cur).is_output) {
        if (path.length() > bp.state_count())
            throw std::logic_error("path longer than state count; program not acyclic");
        int answer = instance.slot(bp.state(cur).query);
        auto next = bp.successors(cur, answer);
        if (next.size() != 1)
            throw std::invalid_argument("deterministic program lacks a unique edge");
        path.labels.push_back(answer);
        cur = next[0];
        path.states.push_back(cur);
    }
    path.complete = true;
    return path;
}

namespace {

// DFS over instance-consistent edges in canonical order; first complete path
// found is the lexicographically least. Collects up to `limit` complete
// paths, or just the first when first_only.
void consistent_dfs(const BranchingProgram& bp, const TepInstance& instance, bool first_only,
                    std::uint64_t limit, std::vector<ComputationPath>& out) {
    ComputationPath cur;
    cur.states.push_back(bp.start());

    struct Frame {
        std::vector<int> succ;
        size_t next = 0;
    };
    std::vector<Frame> stack;

    auto expand = [&](int state) {
        Frame f;
        if (!bp.state(state).is_output)
            f.succ = bp.successors(state, instance.slot(bp.state(state).query));
        return f;
    };

    stack.push_back(expand(bp.start()));
    while (!stack.empty()) {
        int state = cur.states.back();
        if (bp.state(state).is_output) {
            ComputationPath done = cur;
            done.complete = true;
            out.push_back(std::move(done));
            if (first_only) return;
            if (out.size() > limit)
                throw budget_error("complete-path enumeration exceeded the path cap");
        }
        Frame& f = stack.back();
        if (bp.state(state).is_output || f.next >= f.succ.size()) {
            stack.pop_back();
            cur.states.pop_back();
            if (!cur.labels.empty()) cur.labels.pop_back();
            continue;
        }
        int to = f.succ[f.next++];
        cur.labels.push_back(instance.slot(bp.state(state).query));
        cur.states.push_back(to);
        stack.push_back(expand(to));
    }
}

}  // namespace

std::vector<ComputationPath> enumerate_complete_paths(const BranchingProgram& bp,
                                                      const TepInstance& instance,
                                                      const Budget& budget) {
    std::vector<ComputationPath> out;
    consistent_dfs(bp, instance, false, budget.path_cap, out);
    return out;
}

ComputationPath canonical_path(const BranchingProgram& bp, const TepInstance& instance,
                               const Budget& budget) {
    if (bp.is_deterministic()) return run_deterministic(bp, instance);
    std::vector<ComputationPath> out;
    consistent_dfs(bp, instance, true, budget.path_cap, out);
    if (out.empty()) throw std::invalid_argument("no complete computation path exists");
    return out.front();
}

// ---------------------------------------------------------------------------
// JSON / DOT

std::string bp_to_json(const BranchingProgram& bp) {
    json j;
    j["k"] = bp.k();
    j["h"] = bp.shape().h;
    j["start"] = bp.state(bp.start()).id;
    j["deterministic"] = bp.is_deterministic();
    json states = json::array();
    for (int i = 0; i < bp.state_count(); ++i) {
        const BpState& s = bp.state(i);
        json q;
        if (s.is_output) {
            q = {{"kind", "output"}, {"value", s.output}};
        } else if (s.query.kind == QueryId::Leaf) {
            q = {{"kind", "leaf"}, {"node", s.query.node}};
        } else {
            q = {{"kind", "func"}, {"node", s.query.node}, {"x", s.query.x}, {"y", s.query.y}};
        }
        states.push_back({{"id", s.id}, {"query", q}});
    }
    j["states"] = states;
    json edges = json::array();
    for (int i = 0; i < bp.state_count(); ++i)
        for (const auto& e : bp.out_edges(i))
            edges.push_back({{"from", bp.state(i).id}, {"label", e.label}, {"to", bp.state(e.to).id}});
    j["edges"] = edges;
    if (!bp.layers.empty()) {
        json layers = json::array();
        for (const auto& l : bp.layers)
            layers.push_back({{"step", l.step}, {"pebbles", l.pebbles}, {"width", l.width}});
        j["layers"] = layers;
    }
    return j.dump(2) + "\n";
}

BranchingProgram bp_from_json(const std::string& text) {
    json j = json::parse(text);
    TreeShape shape(j.at("h").get<int>());
    int k = j.at("k").get<int>();
    BranchingProgram bp(shape, k);

    std::map<int, int> index_by_id;
    for (const auto& sj : j.at("states")) {
        int id = sj.at("id").get<int>();
        if (index_by_id.count(id)) throw std::invalid_argument("duplicate state id");
        const auto& q = sj.at("query");
        std::string kind = q.at("kind").get<std::string>();
        int index;
        if (kind == "output") {
            index = bp.add_output_state(id, q.at("value").get<int>());
        } else if (kind == "leaf") {
            index = bp.add_query_state(id, QueryId::leaf(q.at("node").get<int>()));
        } else if (kind == "func") {
            index = bp.add_query_state(
                id, QueryId::func(q.at("node").get<int>(), q.at("x").get<int>(), q.at("y").get<int>()));
        } else {
            throw std::invalid_argument("unknown query kind: " + kind);
        }
        index_by_id[id] = index;
    }
    for (const auto& ej : j.at("edges")) {
        auto from = index_by_id.find(ej.at("from").get<int>());
        auto to = index_by_id.find(ej.at("to").get<int>());
        if (from == index_by_id.end() || to == index_by_id.end())
            throw std::invalid_argument("edge references unknown state id");
        bp.add_edge(from->second, ej.at("label").get<int>(), to->second);
    }
    auto start = index_by_id.find(j.at("start").get<int>());
    if (start == index_by_id.end()) throw std::invalid_argument("start references unknown state id");
    bp.set_start(start->second);
    if (j.contains("deterministic")) {
        bp.has_determinism_claim = true;
        bp.claims_deterministic = j.at("deterministic").get<bool>();
    }
    if (j.contains("layers")) {
        for (const auto& lj : j.at("layers"))
            bp.layers.push_back(LayerInfo{lj.at("step").get<int>(), lj.at("pebbles").get<int>(),
                                          lj.at("width").get<int>()});
    }
    bp.finalize();
    return bp;
}

std::string bp_to_dot(const BranchingProgram& bp) {
    std::ostringstream os;
    os << "digraph bp {\n  rankdir=TB;\n";
    for (int i = 0; i < bp.state_count(); ++i) {
        const BpState& s = bp.state(i);
        if (s.is_output) {
            os << "  s" << s.id << " [shape=doublecircle,label=\"" << s.output << "\"];\n";
        } else {
            os << "  s" << s.id << " [shape=box,label=\"" << s.query.str() << "\"];\n";
        }
    }
    for (int i = 0; i < bp.state_count(); ++i)
        for (const auto& e : bp.out_edges(i))
            os << "  s" << bp.state(i).id << " -> s" << bp.state(e.to).id << " [label=\"" << e.label
               << "\"];\n";
    os << "}\n";
    return os.str();
}

}  // namespace tep
