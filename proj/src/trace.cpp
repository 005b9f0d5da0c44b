#include "tep/trace.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace tep {

using nlohmann::json;

namespace {

int query_node(const BranchingProgram& bp, int state) {
    return bp.state(state).query.node;
}

json instance_witness(const TepInstance& inst) { return json::parse(instance_to_json(inst)); }

json path_ids(const BranchingProgram& bp, const ComputationPath& path) {
    json ids = json::array();
    for (int s : path.states) ids.push_back(bp.state(s).id);
    return ids;
}

}  // namespace

// ---------------------------------------------------------------------------
// §3: deterministic thrifty

CriticalMap det_thrifty_critical_states(const BranchingProgram& bp, const ComputationPath& path) {
    const TreeShape& shape = bp.shape();
    CriticalMap map;
    map.position.assign(shape.node_count() + 1, -1);
    if (!path.complete) throw std::invalid_argument("critical states need a complete path");

    // root: last state querying it
    for (int t = path.length() - 2; t >= 0; --t)
        if (query_node(bp, path.states[t]) == 1) {
            map.position[1] = t;
            break;
        }
    if (map.position[1] < 0)
        throw analysis_error("path never queries the root (thriftiness violated)",
                             {{"path", path_ids(bp, path)}});

    // each non-root node: last query before the parent's critical state
    for (int i = 2; i <= shape.node_count(); ++i) {
        int bound = map.position[shape.parent(i)];
        if (bound < 0)
            throw analysis_error("parent critical state missing", {{"node", i}});
        for (int t = bound - 1; t >= 0; --t)
            if (query_node(bp, path.states[t]) == i) {
                map.position[i] = t;
                break;
            }
        if (map.position[i] < 0)
            throw analysis_error("node never queried before its parent's critical state",
                                 {{"node", i}, {"path", path_ids(bp, path)}});
    }
    return map;
}

PebbleSequence det_thrifty_pebbling(const BranchingProgram& bp, const ComputationPath& path,
                                    const CriticalMap& critical) {
    const TreeShape& shape = bp.shape();
    std::vector<std::pair<int, int>> order;  // (position, node)
    for (int i = 1; i <= shape.node_count(); ++i) order.emplace_back(critical.at(i), i);
    std::sort(order.begin(), order.end());

    PebbleSequence seq;
    seq.game = Game::Black;
    seq.shape = shape;
    seq.configs.push_back(PebbleConfiguration(shape));
    seq.markers.push_back(order.front().first);

    for (size_t j = 0; j < order.size(); ++j) {
        int node = order[j].second;
        PebbleMove mv;
        if (shape.is_leaf(node)) {
            mv.kind = PebbleMove::PlaceBlackLeaf;
            mv.node = node;
        } else {
            mv.kind = PebbleMove::BlackSlide;
            mv.node = node;
            mv.clear = {shape.left(node), shape.right(node)};
        }
        PebbleConfiguration next;
        MoveError err = apply_move(seq.configs.back(), mv, Game::Black, next);
        if (!err.ok)
            throw analysis_error("critical-state pebbling produced an illegal move: " + err.rule,
                                 {{"node", node}});
        seq.configs.push_back(next);
        seq.moves.push_back(mv);
        seq.markers.push_back(j + 1 < order.size() ? order[j + 1].first : path.length() - 1);
    }
    return seq;
}

int supercritical_position(const PebbleSequence& seq, const Rat& threshold) {
    for (size_t t = 0; t < seq.configs.size(); ++t)
        if (seq.configs[t].total() >= threshold) return seq.markers[t];
    throw analysis_error("no configuration reaches the pebble threshold",
                         {{"threshold", threshold.str()}});
}

namespace {

// Learning bookkeeping shared by the tag encoder and decoder. On C1 a node
// is learned when its parent is queried before it; the learned value is the
// corresponding argument of that query.
struct LearnOrder {
    std::vector<int> learned;              // nodes in learn order (ties: left child first)
    std::vector<int> first_query;          // per node: first query position on C1, or INT_MAX
};

}  // namespace

Tag det_thrifty_tag(const BranchingProgram& bp, const TepInstance& instance,
                    const ComputationPath& path) {
    const TreeShape& shape = bp.shape();
    int n = shape.node_count();
    NodeValues nv = evaluate(instance);

    CriticalMap critical = det_thrifty_critical_states(bp, path);
    PebbleSequence seq = det_thrifty_pebbling(bp, path, critical);
    int gamma_pos = supercritical_position(seq, Rat(shape.h));

    constexpr int NEVER = std::numeric_limits<int>::max();
    std::vector<int> first_query(n + 1, NEVER), first_parent_query(n + 1, NEVER);
    for (int t = gamma_pos; t < path.length() - 1; ++t) {
        int i = query_node(bp, path.states[t]);
        if (first_query[i] == NEVER) first_query[i] = t;
        if (shape.is_internal(i)) {
            for (int c : {shape.left(i), shape.right(i)})
                if (first_parent_query[c] == NEVER) first_parent_query[c] = t;
        }
    }

    // learned: parent queried before the node; order by (learn position, id)
    std::vector<std::pair<int, int>> learn_events;
    for (int i = 2; i <= n; ++i)
        if (first_parent_query[i] < first_query[i]) learn_events.emplace_back(first_parent_query[i], i);
    std::sort(learn_events.begin(), learn_events.end());
    if ((int)learn_events.size() < shape.h)
        throw analysis_error("fewer than h nodes learned after the supercritical state",
                             {{"learned", (int)learn_events.size()}, {"h", shape.h}});

    std::vector<bool> excluded(n + 1, false);
    for (int j = 0; j < shape.h; ++j) excluded[learn_events[j].second] = true;

    // u1: unlearned nodes queried on C1, in first-occurrence order
    std::vector<bool> learned(n + 1, false);
    for (const auto& [pos, i] : learn_events) learned[i] = true;
    std::vector<std::pair<int, int>> u1_order;
    for (int i = 1; i <= n; ++i)
        if (!learned[i] && first_query[i] != NEVER) u1_order.emplace_back(first_query[i], i);
    std::sort(u1_order.begin(), u1_order.end());

    Tag tag;
    tag.gamma_state_id = bp.state(path.states[gamma_pos]).id;
    std::vector<bool> in_v(n + 1, false);
    for (const auto& [pos, i] : u1_order) {
        tag.v.push_back((std::uint8_t)nv.value(i));
        in_v[i] = true;
    }
    for (int i = 1; i <= n; ++i)
        if (!excluded[i] && !in_v[i]) tag.v.push_back((std::uint8_t)nv.value(i));
    if ((int)tag.v.size() != n - shape.h)
        throw analysis_error("tag v-component has the wrong length",
                             {{"got", (int)tag.v.size()}, {"want", n - shape.h}});

    // x: non-thrifty table entries in canonical slot order
    for (int s = 0; s < instance.slot_count(); ++s) {
        QueryId q = instance.slot_query(s);
        if (q.kind != QueryId::Func) continue;
        if (q.x == nv.value(shape.left(q.node)) && q.y == nv.value(shape.right(q.node))) continue;
        tag.x.push_back((std::uint8_t)instance.raw()[s]);
    }
    return tag;
}

TepInstance det_thrifty_untag(const BranchingProgram& bp, const Tag& tag) {
    const TreeShape& shape = bp.shape();
    int n = shape.node_count();
    int k = bp.k();
    int gamma = bp.index_of_id(tag.gamma_state_id);
    if (gamma < 0) throw std::invalid_argument("tag names an unknown state");

    std::vector<int> value(n + 1, 0);
    std::vector<int> learn_seq;        // learn events in order
    std::vector<bool> from_u1(n + 1, false);
    size_t u1_next = 0;

    // replay C1 from gamma, learning children at parent queries and consuming
    // u1 for unlearned first queries
    int cur = gamma;
    int guard = 0;
    while (!bp.state(cur).is_output) {
        if (++guard > bp.state_count())
            throw analysis_error("untag replay exceeded the state count", {});
        const QueryId& q = bp.state(cur).query;
        int i = q.node;
        if (q.kind == QueryId::Func) {
            if (value[shape.left(i)] == 0) {
                value[shape.left(i)] = q.x;
                learn_seq.push_back(shape.left(i));
            }
            if (value[shape.right(i)] == 0) {
                value[shape.right(i)] = q.y;
                learn_seq.push_back(shape.right(i));
            }
        }
        int answer;
        if (value[i] != 0) {
            answer = value[i];
        } else {
            if (u1_next >= tag.v.size())
                throw analysis_error("tag v-component exhausted during replay", {});
            answer = tag.v[u1_next++];
            value[i] = answer;
            from_u1[i] = true;
        }
        auto succ = bp.successors(cur, answer);
        if (succ.size() != 1)
            throw analysis_error("untag replay requires a deterministic program", {});
        cur = succ[0];
    }

    if ((int)learn_seq.size() < shape.h)
        throw analysis_error("fewer than h nodes learned during untag replay", {});
    std::vector<bool> excluded(n + 1, false);
    for (int j = 0; j < shape.h; ++j) excluded[learn_seq[j]] = true;

    // u2: remaining nodes ascending; late-learned nodes re-specified and must
    // agree with the replay
    for (int i = 1; i <= n; ++i) {
        if (excluded[i] || from_u1[i]) continue;
        if (u1_next >= tag.v.size())
            throw analysis_error("tag v-component too short for u2", {});
        int v = tag.v[u1_next++];
        if (value[i] != 0 && value[i] != v)
            throw analysis_error("u2 value disagrees with a learned value (non-thrifty program?)",
                                 {{"node", i}});
        value[i] = v;
    }
    if (u1_next != tag.v.size())
        throw analysis_error("tag v-component not fully consumed", {});

    // assemble the instance: leaves and thrifty slots from node values,
    // non-thrifty slots from x
    TepInstance inst(shape, k);
    for (int i = shape.first_leaf(); i <= n; ++i) inst.set_leaf(i, value[i]);
    size_t xi = 0;
    for (int s = 0; s < inst.slot_count(); ++s) {
        QueryId q = inst.slot_query(s);
        if (q.kind != QueryId::Func) continue;
        if (q.x == value[shape.left(q.node)] && q.y == value[shape.right(q.node)]) {
            inst.set_slot(q, value[q.node]);
        } else {
            if (xi >= tag.x.size()) throw analysis_error("tag x-component too short", {});
            inst.set_slot(q, tag.x[xi++]);
        }
    }
    if (xi != tag.x.size()) throw analysis_error("tag x-component not fully consumed", {});
    return inst;
}

// ---------------------------------------------------------------------------
// §4: read-once thrifty pebbling

PebbleSequence ro_thrifty_bw_pebbling(const BranchingProgram& bp, const ComputationPath& path,
                                      RoMode mode) {
    const TreeShape& shape = bp.shape();
    if (!path.complete) throw std::invalid_argument("pebbling needs a complete path");

    std::vector<int> first_query(shape.node_count() + 1, -1);
    for (int t = 0; t < path.length() - 1; ++t) {
        int i = query_node(bp, path.states[t]);
        if (first_query[i] < 0) first_query[i] = t;
    }

    PebbleSequence seq;
    seq.game = Game::WholeBW;
    seq.shape = shape;
    seq.configs.push_back(PebbleConfiguration(shape));
    seq.markers.push_back(0);

    auto emit = [&](PebbleMove mv, int marker) {
        PebbleConfiguration next;
        MoveError err = apply_move(seq.configs.back(), mv, Game::WholeBW, next);
        if (!err.ok)
            throw analysis_error("read-once pebbling move illegal: " + err.rule,
                                 {{"move", mv.str()}, {"marker", marker}});
        seq.configs.push_back(std::move(next));
        seq.moves.push_back(std::move(mv));
        seq.markers.push_back(marker);
    };

    for (int t = 0; t < path.length() - 1; ++t) {
        int i = query_node(bp, path.states[t]);
        if (mode == RoMode::NullPathFree && first_query[i] != t) continue;  // critical states only

        // (1) white pebbles on unpebbled children, configurations at this state
        if (shape.is_internal(i)) {
            for (int c : {shape.left(i), shape.right(i)}) {
                if (seq.configs.back().b[c] == Rat(0) && seq.configs.back().w[c] == Rat(0)) {
                    PebbleMove mv;
                    mv.kind = PebbleMove::IncW;
                    mv.node = c;
                    emit(std::move(mv), t);
                }
            }
        }
        if (seq.configs.back().b[i] + seq.configs.back().w[i] == Rat(1)) {
            // (2a) the pebble must be white: remove it, then the children's blacks
            if (seq.configs.back().b[i] == Rat(1))
                throw analysis_error(
                    "queried node carries a black pebble; path is not read-once thrifty as claimed",
                    {{"node", i}, {"position", t}, {"path", path_ids(bp, path)}});
            PebbleMove mv;
            mv.kind = shape.is_leaf(i) ? PebbleMove::DecWLeaf : PebbleMove::DecWInternal;
            mv.node = i;
            emit(std::move(mv), t);
            if (shape.is_internal(i)) {
                for (int c : {shape.left(i), shape.right(i)})
                    if (seq.configs.back().b[c] == Rat(1)) {
                        PebbleMove dm;
                        dm.kind = PebbleMove::DecB;
                        dm.node = c;
                        emit(std::move(dm), t);
                    }
            }
        } else {
            // (2b) black-pebble i, clearing the children's blacks in the slide
            PebbleMove mv;
            if (shape.is_leaf(i)) {
                mv.kind = PebbleMove::IncBLeaf;
                mv.node = i;
            } else {
                mv.kind = PebbleMove::IncBInternal;
                mv.node = i;
                mv.dec_left = seq.configs.back().b[shape.left(i)];
                mv.dec_right = seq.configs.back().b[shape.right(i)];
            }
            emit(std::move(mv), t + 1);
        }
    }

    // final removal of the root pebble
    if (seq.configs.back().b[1] == Rat(1)) {
        PebbleMove mv;
        mv.kind = PebbleMove::DecB;
        mv.node = 1;
        emit(std::move(mv), path.length() - 1);
    }
    return seq;
}

Verdict check_pebble_soundness(
    const BranchingProgram& bp,
    const std::function<PebbleSequence(const BranchingProgram&, const ComputationPath&)>& pebbling_fn,
    const Budget& budget) {
    Verdict v;
    v.property = "pebble_soundness";
    StateValueProfile profile = reach_sets(bp, budget);
    v.sampled = profile.sampled;

    auto size = instance_space_size(bp.shape(), bp.k());
    bool exhaustive = size && *size <= budget.exhaustive_cap;
    std::uint64_t count = exhaustive ? *size : budget.sample_count;

    for (std::uint64_t idx = 0; idx < count && v.pass; ++idx) {
        TepInstance inst = exhaustive ? instance_from_index(bp.shape(), bp.k(), idx)
                                      : sample_instance(bp.shape(), bp.k(), budget.sample_seed + idx);
        NodeValues nv = evaluate(inst);
        ComputationPath path = canonical_path(bp, inst, budget);
        PebbleSequence seq = pebbling_fn(bp, path);
        for (size_t t = 0; t < seq.configs.size() && v.pass; ++t) {
            int state = path.states[seq.markers[t]];
            for (int i = 1; i <= bp.shape().node_count(); ++i) {
                if (seq.configs[t].b[i] + seq.configs[t].w[i] == Rat(0)) continue;
                std::uint32_t want = 1u << (nv.value(i) - 1);
                if (profile.A[state][i] == want) continue;
                v.pass = false;
                v.detail = "a pebbled node's value is not determined by the state";
                v.witness = {{"state", bp.state(state).id},
                             {"node", i},
                             {"instance", instance_witness(inst)},
                             {"value", nv.value(i)},
                             {"a_mask", profile.A[state][i]}};
                // a second instance through the state with a different value
                if (exhaustive) {
                    for (std::uint64_t j = 0; j < count; ++j) {
                        TepInstance other = instance_from_index(bp.shape(), bp.k(), j);
                        if (evaluate(other).value(i) == nv.value(i)) continue;
                        if (instance_reach(bp, other).through[state]) {
                            v.witness["other_instance"] = instance_witness(other);
                            break;
                        }
                    }
                }
                break;
            }
        }
    }
    return v;
}

// ---------------------------------------------------------------------------
// Lehmer codes

std::uint64_t lehmer_rank(const std::vector<int>& order) {
    size_t n = order.size();
    if (n > 20) throw std::invalid_argument("permutation too long for a 64-bit rank");
    std::vector<int> sorted(order);
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t fact = 1;
    for (size_t i = 2; i <= n; ++i) fact *= i;
    std::uint64_t rank = 0;
    std::vector<bool> used(n, false);
    for (size_t t = 0; t < n; ++t) {
        fact /= (n - t);
        size_t below = 0;
        for (size_t j = 0; j < n; ++j) {
            if (sorted[j] == order[t]) {
                used[j] = true;
                break;
            }
            if (!used[j]) ++below;
        }
        rank += below * fact;
    }
    return rank;
}

std::vector<int> lehmer_unrank(std::uint64_t rank, std::vector<int> sorted_ids) {
    std::sort(sorted_ids.begin(), sorted_ids.end());
    size_t n = sorted_ids.size();
    std::uint64_t fact = 1;
    for (size_t i = 2; i <= n; ++i) fact *= i;
    std::vector<int> order;
    for (size_t t = 0; t < n; ++t) {
        fact /= (n - t);
        size_t pick = rank / fact;
        rank %= fact;
        order.push_back(sorted_ids[pick]);
        sorted_ids.erase(sorted_ids.begin() + pick);
    }
    return order;
}

// ---------------------------------------------------------------------------
// §4.3 semantic tag

namespace {

// Pebbled set at the first configuration reaching the whole-game threshold,
// determined by the query order alone.
std::vector<int> pebbled_at_supercritical(const TreeShape& shape, const std::vector<int>& order,
                                          int threshold) {
    std::vector<int> b(shape.node_count() + 1, 0), w(shape.node_count() + 1, 0);
    int total = 0;
    auto scan = [&]() -> std::vector<int> {
        if (total < threshold) return {};
        std::vector<int> pebbled;
        for (int i = 1; i <= shape.node_count(); ++i)
            if (b[i] || w[i]) pebbled.push_back(i);
        return pebbled;
    };
    if (auto p = scan(); !p.empty()) return p;
    for (int i : order) {
        if (shape.is_internal(i)) {
            for (int c : {shape.left(i), shape.right(i)})
                if (!b[c] && !w[c]) {
                    w[c] = 1;
                    ++total;
                    if (auto p = scan(); !p.empty()) return p;
                }
        }
        if (b[i] || w[i]) {
            // (2a)
            w[i] = 0;
            --total;
            if (shape.is_internal(i)) {
                for (int c : {shape.left(i), shape.right(i)})
                    if (b[c]) {
                        b[c] = 0;
                        --total;
                    }
            }
        } else {
            // (2b)
            b[i] = 1;
            ++total;
            if (shape.is_internal(i)) {
                for (int c : {shape.left(i), shape.right(i)})
                    if (b[c]) {
                        b[c] = 0;
                        --total;
                    }
            }
            if (auto p = scan(); !p.empty()) return p;
        }
    }
    throw analysis_error("query order never reaches the pebble threshold", {});
}

}  // namespace

SemTag semantic_ro_tag(const BranchingProgram& bp, const TepInstance& instance,
                       const ComputationPath& path) {
    const TreeShape& shape = bp.shape();
    int n = shape.node_count();
    NodeValues nv = evaluate(instance);

    std::vector<int> order;
    std::vector<bool> seen(n + 1, false);
    for (int t = 0; t < path.length() - 1; ++t) {
        int i = query_node(bp, path.states[t]);
        if (seen[i])
            throw analysis_error("path queries a node twice; not a permutation",
                                 {{"node", i}, {"path", path_ids(bp, path)}});
        seen[i] = true;
        order.push_back(i);
    }
    if ((int)order.size() != n)
        throw analysis_error("path does not query every node", {{"queried", (int)order.size()}});

    int e = (shape.h + 1) / 2 + 1;  // ceil(h/2) + 1
    PebbleSequence seq = ro_thrifty_bw_pebbling(bp, path, RoMode::Syntactic);
    int gamma_pos = supercritical_position(seq, Rat(e));

    SemTag tag;
    tag.permutation_rank = lehmer_rank(order);
    tag.gamma_state_id = bp.state(path.states[gamma_pos]).id;

    std::vector<int> pebbled = pebbled_at_supercritical(shape, order, e);
    std::vector<bool> excl_slot(instance.slot_count(), false);
    for (int i : pebbled) {
        QueryId q = shape.is_leaf(i)
                        ? QueryId::leaf(i)
                        : QueryId::func(i, nv.value(shape.left(i)), nv.value(shape.right(i)));
        excl_slot[instance.slot_index(q)] = true;
    }
    for (int s = 0; s < instance.slot_count(); ++s)
        if (!excl_slot[s]) tag.x.push_back(instance.raw()[s]);
    return tag;
}

TepInstance semantic_ro_untag(const BranchingProgram& bp, const SemTag& tag,
                              const StateValueProfile& profile) {
    const TreeShape& shape = bp.shape();
    int n = shape.node_count();
    int k = bp.k();
    int gamma = bp.index_of_id(tag.gamma_state_id);
    if (gamma < 0) throw std::invalid_argument("tag names an unknown state");

    std::vector<int> ids(n);
    std::iota(ids.begin(), ids.end(), 1);
    std::vector<int> order = lehmer_unrank(tag.permutation_rank, ids);
    int e = (shape.h + 1) / 2 + 1;
    std::vector<int> pebbled = pebbled_at_supercritical(shape, order, e);

    std::vector<bool> is_pebbled(n + 1, false);
    std::vector<int> value(n + 1, 0);
    for (int i : pebbled) {
        is_pebbled[i] = true;
        std::uint32_t mask = profile.A[gamma][i];
        if (__builtin_popcount(mask) != 1)
            throw analysis_error("pebbled node value not determined by the state (Lemma rot_pebbles)",
                                 {{"state", tag.gamma_state_id}, {"node", i}, {"mask", mask}});
        value[i] = __builtin_ctz(mask) + 1;
    }

    // phase 1: node values bottom-up; x positions of still-unplaced slots are
    // computable because each pebbled node excludes exactly one slot
    TepInstance inst(shape, k);
    int pebbled_leaves = 0;
    for (int i : pebbled)
        if (shape.is_leaf(i)) ++pebbled_leaves;

    auto x_at = [&](const QueryId& target) -> int {
        // excluded slots before this one: pebbled leaf slots with a smaller
        // index, plus one thrifty slot per pebbled internal node whose table
        // block precedes the target's (leaf targets precede every block)
        int slot_index = inst.slot_index(target);
        int before = 0;
        for (int i : pebbled) {
            if (shape.is_leaf(i)) {
                if (inst.slot_index(QueryId::leaf(i)) < slot_index) ++before;
            } else if (target.kind == QueryId::Func && i < target.node) {
                ++before;
            }
        }
        int pos = slot_index - before;
        if (pos < 0 || pos >= (int)tag.x.size())
            throw analysis_error("tag x-component index out of range", {{"slot", slot_index}});
        return tag.x[pos];
    };

    for (int i = n; i >= 1; --i) {
        if (shape.is_leaf(i)) {
            if (!is_pebbled[i]) value[i] = x_at(QueryId::leaf(i));
        } else if (!is_pebbled[i]) {
            value[i] = x_at(QueryId::func(i, value[shape.left(i)], value[shape.right(i)]));
        }
    }

    // phase 2: excluded set now explicit; fill every slot
    std::vector<bool> excl_slot(inst.slot_count(), false);
    for (int i : pebbled) {
        QueryId q = shape.is_leaf(i)
                        ? QueryId::leaf(i)
                        : QueryId::func(i, value[shape.left(i)], value[shape.right(i)]);
        excl_slot[inst.slot_index(q)] = true;
    }
    size_t xi = 0;
    for (int s = 0; s < inst.slot_count(); ++s) {
        if (excl_slot[s]) {
            QueryId q = inst.slot_query(s);
            inst.raw()[s] = (std::uint8_t)value[q.node];
        } else {
            if (xi >= tag.x.size()) throw analysis_error("tag x-component too short", {});
            inst.raw()[s] = tag.x[xi++];
        }
    }
    if (xi != tag.x.size()) throw analysis_error("tag x-component not fully consumed", {});
    return inst;
}

// ---------------------------------------------------------------------------
// §5: Algorithm 1

std::uint32_t AnalysisTrace::range_at(int pos, int node) const {
    return ranges[pos * (shape.node_count() + 1) + node];
}
bool AnalysisTrace::active_at(int pos, int node) const {
    return active[pos * (shape.node_count() + 1) + node];
}
int AnalysisTrace::class_of(int pos, int node, int value) const {
    return classes[(pos * (shape.node_count() + 1) + node) * k + (value - 1)];
}

namespace {

struct Algo1Runner {
    const BranchingProgram& bp;
    const TepInstance& inst;
    const ComputationPath& path;
    const TreeShape& shape;
    int n, k;

    std::vector<bool> queried;          // per slot index
    std::vector<std::uint32_t> range;   // per node
    std::vector<std::int8_t> cls;       // per node*k
    std::vector<bool> act;
    std::vector<bool> cq;
    std::vector<int> black;             // per node: value or 0
    std::set<GreyPebble> grey;
    std::vector<bool> ever_black;

    AnalysisTrace trace;

    Algo1Runner(const BranchingProgram& b, const TepInstance& i, const ComputationPath& p)
        : bp(b), inst(i), path(p), shape(b.shape()), n(b.shape().node_count()), k(b.k()) {
        queried.assign(inst.slot_count(), false);
        range.assign(n + 1, 0);
        cls.assign((n + 1) * k, -1);
        act.assign(n + 1, true);
        cq.assign(n + 1, false);
        black.assign(n + 1, 0);
        ever_black.assign(n + 1, false);
        trace.shape = shape;
        trace.k = k;
    }

    bool entry_queried(int i, int x, int y) const {
        return queried[inst.slot_index(QueryId::func(i, x, y))];
    }

    void emit_config() {
        GreyBlackConfig c;
        c.black = black;
        c.grey = grey;
        trace.intermediate.push_back(std::move(c));
    }

    void update_ranges() {
        for (int i = n; i >= 1; --i) {
            if (shape.is_leaf(i)) {
                bool q = queried[inst.slot_index(QueryId::leaf(i))];
                cq[i] = q;
                range[i] = q ? (1u << (inst.leaf(i) - 1)) : ((1u << k) - 1);
                continue;
            }
            // completely queried: every (x,y) over the children's ranges seen
            bool complete = true;
            for (int x = 1; x <= k && complete; ++x) {
                if (!(range[shape.left(i)] >> (x - 1) & 1)) continue;
                for (int y = 1; y <= k && complete; ++y) {
                    if (!(range[shape.right(i)] >> (y - 1) & 1)) continue;
                    if (!entry_queried(i, x, y)) complete = false;
                }
            }
            cq[i] = complete;
            if (!complete) {
                range[i] = (1u << k) - 1;
                continue;
            }
            std::uint32_t out = 0;
            for (int x = 1; x <= k; ++x) {
                if (!(range[shape.left(i)] >> (x - 1) & 1)) continue;
                for (int y = 1; y <= k; ++y) {
                    if (!(range[shape.right(i)] >> (y - 1) & 1)) continue;
                    out |= 1u << (inst.table(i, x, y) - 1);
                }
            }
            range[i] = out;
        }
    }

    // strict pairwise equivalence for distinct values; reflexive by fiat
    bool equivalent(int i, int a1, int a2) const {
        if (a1 == a2) return true;
        if (i == 1) return false;
        int j = shape.parent(i);
        int sib = shape.sibling(i);
        bool left = (i % 2 == 0);
        for (int b = 1; b <= k; ++b) {
            if (!(range[sib] >> (b - 1) & 1)) continue;
            int x1 = left ? a1 : b, y1 = left ? b : a1;
            int x2 = left ? a2 : b, y2 = left ? b : a2;
            if (!entry_queried(j, x1, y1) || !entry_queried(j, x2, y2)) return false;
            int c1 = inst.table(j, x1, y1), c2 = inst.table(j, x2, y2);
            if (cls[j * k + (c1 - 1)] != cls[j * k + (c2 - 1)] || cls[j * k + (c1 - 1)] < 0)
                return false;
        }
        return true;
    }

    void update_classes_and_activity() {
        // top-down: parent classes feed into the children's equivalence
        for (int i = 1; i <= n; ++i) {
            for (int v = 0; v < k; ++v) cls[i * k + v] = -1;
            int next_class = 0;
            for (int a = 1; a <= k; ++a) {
                if (!(range[i] >> (a - 1) & 1)) continue;
                int assigned = -1;
                for (int b = 1; b < a; ++b) {
                    if (!(range[i] >> (b - 1) & 1)) continue;
                    if (equivalent(i, b, a)) {
                        assigned = cls[i * k + (b - 1)];
                        break;
                    }
                }
                cls[i * k + (a - 1)] = assigned >= 0 ? (std::int8_t)assigned : (std::int8_t)next_class++;
            }
        }
        for (int i = 1; i <= n; ++i) {
            bool multi = false;
            for (int a = 1; a <= k && !multi; ++a)
                if ((range[i] >> (a - 1) & 1) && cls[i * k + (a - 1)] > 0) multi = true;
            if (i == 1) {
                act[1] = __builtin_popcount(range[1]) > 1;
            } else {
                act[i] = act[shape.parent(i)] && multi;
            }
        }
    }

    int relevant_count(int i) const {
        if (!shape.is_internal(i)) return 0;
        int count = 0;
        for (int x = 1; x <= k; ++x) {
            if (!(range[shape.left(i)] >> (x - 1) & 1)) continue;
            for (int y = 1; y <= k; ++y) {
                if (!(range[shape.right(i)] >> (y - 1) & 1)) continue;
                if (entry_queried(i, x, y)) ++count;
            }
        }
        return count;
    }

    void place_black(int i, int a) {
        if (ever_black[i]) return;
        black[i] = a;
        ever_black[i] = true;
        emit_config();
    }

    void run() {
        emit_config();  // empty initial configuration
        for (int pos = 0; pos < path.length(); ++pos) {
            update_ranges();
            update_classes_and_activity();

            // snapshot memory
            for (int i = 0; i <= n; ++i) {
                trace.ranges.push_back(i == 0 ? 0 : range[i]);
                trace.active.push_back(i == 0 ? false : act[i]);
                trace.compl_queried.push_back(i == 0 ? false : cq[i]);
                trace.relevant_queries.push_back(i == 0 ? 0 : relevant_count(i));
                for (int v = 0; v < k; ++v)
                    trace.classes.push_back(i == 0 ? (std::int8_t)-1 : cls[i * k + v]);
            }

            // pebble for the preceding state's query
            if (pos > 0) {
                const QueryId& q = bp.state(path.states[pos - 1]).query;
                int answer = path.labels[pos - 1];
                if (q.kind == QueryId::Leaf) {
                    place_black(q.node, answer);
                } else {
                    grey.insert(GreyPebble{q.node, q.x, q.y, answer});
                    emit_config();
                }
            }

            // cleanup, bottom-up
            for (int i = n; i >= 1; --i) {
                if (!act[i]) {
                    for (auto it = grey.begin(); it != grey.end();) {
                        if (it->node == i) {
                            it = grey.erase(it);
                            emit_config();
                        } else {
                            ++it;
                        }
                    }
                    if (__builtin_popcount(range[i]) == 1 && !ever_black[i])
                        place_black(i, __builtin_ctz(range[i]) + 1);
                }
                if ((!act[i] || cq[i]) && shape.is_internal(i)) {
                    for (int c : {shape.left(i), shape.right(i)})
                        if (black[c]) {
                            black[c] = 0;
                            emit_config();
                        }
                }
                // grey pebbles with [i, a] in the antecedent, a outside Range(i)
                if (i != 1) {
                    int p = shape.parent(i);
                    bool left = (i % 2 == 0);
                    for (auto it = grey.begin(); it != grey.end();) {
                        int arg = left ? it->a : it->b;
                        if (it->node == p && !(range[i] >> (arg - 1) & 1)) {
                            it = grey.erase(it);
                            emit_config();
                        } else {
                            ++it;
                        }
                    }
                }
            }
            trace.assoc_config.push_back((int)trace.intermediate.size() - 1);

            // record the query made at this state (defense-in-depth read-once check)
            if (pos < path.length() - 1) {
                int slot = inst.slot_index(bp.state(path.states[pos]).query);
                if (queried[slot])
                    throw analysis_error("path queries a slot twice; not read-once",
                                         {{"slot", bp.state(path.states[pos]).query.str()}});
                queried[slot] = true;
            }
        }
    }
};

}  // namespace

AnalysisTrace algorithm1_trace(const BranchingProgram& bp, const TepInstance& instance,
                               const ComputationPath& path) {
    if (!path.complete) throw std::invalid_argument("Algorithm 1 needs a complete path");
    Algo1Runner runner(bp, instance, path);
    runner.run();
    return std::move(runner.trace);
}

bool check_efficient(const BranchingProgram& bp, const ComputationPath& path,
                     const AnalysisTrace& trace) {
    int n = bp.shape().node_count();
    for (int pos = 0; pos < path.length(); ++pos)
        for (int i = 1; i <= n; ++i)
            if (bp.shape().is_internal(i) && trace.active_at(pos, i) &&
                trace.relevant_queries[pos * (n + 1) + i] >= bp.k() - 1)
                return false;
    return true;
}

int ro_det_supercritical(const ComputationPath& path, const AnalysisTrace& trace) {
    for (int pos = 0; pos < path.length(); ++pos)
        if (trace.config_at(pos).pebble_count() >= trace.shape.h) return pos;
    return -1;
}

PebbleSequence stripped_black_sequence(const TreeShape& shape, const AnalysisTrace& trace) {
    PebbleSequence seq;
    seq.game = Game::Black;
    seq.shape = shape;

    std::vector<std::vector<int>> blacks;
    for (const auto& c : trace.intermediate)
        if (blacks.empty() || blacks.back() != c.black) blacks.push_back(c.black);

    seq.configs.push_back(PebbleConfiguration(shape));
    for (size_t t = 1; t < blacks.size(); ++t) {
        const auto& prev = blacks[t - 1];
        const auto& next = blacks[t];
        int changed = 0, node = 0;
        for (int i = 1; i <= shape.node_count(); ++i)
            if ((prev[i] != 0) != (next[i] != 0)) {
                ++changed;
                node = i;
            }
        if (changed != 1)
            throw analysis_error("stripped black sequence changes several pebbles at once",
                                 {{"step", (int)t}});
        PebbleMove mv;
        if (next[node] != 0) {
            if (shape.is_leaf(node)) {
                mv.kind = PebbleMove::PlaceBlackLeaf;
                mv.node = node;
            } else {
                mv.kind = PebbleMove::BlackSlide;  // clears nothing; removals follow
                mv.node = node;
            }
        } else {
            mv.kind = PebbleMove::RemovePebble;
            mv.node = node;
        }
        PebbleConfiguration cfg(shape);
        for (int i = 1; i <= shape.node_count(); ++i) cfg.b[i] = Rat(next[i] != 0 ? 1 : 0);
        seq.configs.push_back(std::move(cfg));
        seq.moves.push_back(std::move(mv));
    }
    seq.markers.assign(seq.configs.size(), -1);
    return seq;
}

// ---------------------------------------------------------------------------
// §6/§7: state pebble value schedules

namespace {

// log_k(num/den) as an exact rational, when one exists
std::optional<Rat> log_ratio_as_rat(int k, unsigned long long num, unsigned long long den) {
    if (num == den) return Rat(0);
    for (long long q = 1; q <= 8; ++q) {
        unsigned __int128 lhs = 1, rhs = 1;
        bool overflow = false;
        for (long long t = 0; t < q && !overflow; ++t) {
            lhs *= num;
            rhs *= den;
            if (lhs > (unsigned __int128)1 << 100) overflow = true;
        }
        if (overflow) break;
        for (long long p = 1; p <= 64; ++p) {
            rhs *= (unsigned)k;
            if (rhs == lhs) return Rat(p, q);
            if (rhs > lhs) break;
        }
        rhs = 1;
    }
    return std::nullopt;
}

PebbleConfiguration profile_config(const BranchingProgram& bp, const StateValueProfile& profile,
                                   int state) {
    PebbleConfiguration cfg(bp.shape());
    for (int i = 1; i <= bp.shape().node_count(); ++i) {
        int r = profile.r_size(state, i), a = profile.a_size(state, i);
        if (r == 0 || a == 0)
            throw analysis_error("state has empty reach/accept sets on the path",
                                 {{"state", bp.state(state).id}, {"node", i}});
        auto b = log_ratio_as_rat(bp.k(), bp.k(), r);
        auto w = log_ratio_as_rat(bp.k(), r, a);
        if (!b || !w)
            throw analysis_error("state pebble value is not an exact rational",
                                 {{"state", bp.state(state).id},
                                  {"node", i},
                                  {"r", r},
                                  {"a", a}});
        cfg.b[i] = *b;
        cfg.w[i] = *w;
    }
    return cfg;
}

}  // namespace

PebbleSequence independent_schedule(const BranchingProgram& bp, const ComputationPath& path,
                                    const StateValueProfile& profile, IndependentVariant variant) {
    const TreeShape& shape = bp.shape();
    if (!path.complete) throw std::invalid_argument("schedule needs a complete path");

    PebbleSequence seq;
    seq.game = Game::Fractional;
    seq.denominator = 0;  // exact rationals from set sizes, no fixed granularity
    seq.shape = shape;
    seq.configs.push_back(profile_config(bp, profile, path.states[0]));
    seq.markers.push_back(0);
    if (!seq.configs.front().empty())
        throw analysis_error("start state pebble values are not all zero", {});

    auto emit = [&](PebbleMove mv, int marker, const char* prop) {
        PebbleConfiguration next;
        MoveError err = apply_move(seq.configs.back(), mv, Game::Fractional, next);
        if (!err.ok)
            throw analysis_error(std::string("schedule move illegal (") + prop + "): " + err.rule,
                                 {{"move", mv.str()}, {"position", marker}});
        seq.configs.push_back(std::move(next));
        seq.moves.push_back(std::move(mv));
        seq.markers.push_back(marker);
    };

    for (int t = 0; t + 1 < path.length(); ++t) {
        int i = query_node(bp, path.states[t]);
        bool internal = shape.is_internal(i);
        int l = internal ? shape.left(i) : 0, r = internal ? shape.right(i) : 0;
        PebbleConfiguration target = profile_config(bp, profile, path.states[t + 1]);
        size_t moves_before = seq.moves.size();
        const char* white_prop =
            variant == IndependentVariant::BitwiseThrifty ? "bi_white" : "niro_white";

        // (1) black decreases everywhere except i and its children
        for (int j = 1; j <= shape.node_count(); ++j) {
            if (j == i || (internal && (j == l || j == r))) continue;
            const Rat cur_b = seq.configs.back().b[j];
            if (target.b[j] > cur_b)
                throw analysis_error("bi_black violated: black value increases off the queried node",
                                     {{"node", j}, {"position", t}});
            if (target.w[j] < seq.configs.back().w[j])
                throw analysis_error(std::string(white_prop) +
                                         " violated: white value decreases off the queried node",
                                     {{"node", j}, {"position", t}});
            if (target.b[j] < cur_b) {
                PebbleMove mv;
                mv.kind = PebbleMove::DecB;
                mv.node = j;
                mv.amount = cur_b - target.b[j];
                emit(std::move(mv), t, "bi_black");
            }
        }

        bool dec_white_i = target.w[i] < seq.configs.back().w[i];
        bool inc_black_i = target.b[i] > seq.configs.back().b[i];

        // (2') read-once variant: fully pebble the children first when needed
        if (variant == IndependentVariant::NodeIndependentRO && internal &&
            (dec_white_i || inc_black_i)) {
            for (int c : {l, r}) {
                Rat gap = Rat(1) - seq.configs.back().b[c] - seq.configs.back().w[c];
                if (gap > Rat(0)) {
                    PebbleMove mv;
                    mv.kind = PebbleMove::IncW;
                    mv.node = c;
                    mv.amount = gap;
                    emit(std::move(mv), t, "niro_children");
                }
            }
        }

        // (2a) white decrease at the queried node
        if (dec_white_i) {
            PebbleMove mv;
            mv.kind = internal ? PebbleMove::DecWInternal : PebbleMove::DecWLeaf;
            mv.node = i;
            mv.amount = seq.configs.back().w[i] - target.w[i];
            emit(std::move(mv), t,
                 variant == IndependentVariant::BitwiseThrifty ? "bi_thrifty" : "niro_children");
        }

        // (2b) black increase at the queried node, children's blacks dropped in
        // the same move; otherwise plain decreases
        if (inc_black_i) {
            PebbleMove mv;
            if (internal) {
                mv.kind = PebbleMove::IncBInternal;
                mv.node = i;
                mv.amount = target.b[i] - seq.configs.back().b[i];
                if (target.b[l] > seq.configs.back().b[l] || target.b[r] > seq.configs.back().b[r])
                    throw analysis_error("bi_black violated: black value increases at a child",
                                         {{"node", i}, {"position", t}});
                mv.dec_left = seq.configs.back().b[l] - target.b[l];
                mv.dec_right = seq.configs.back().b[r] - target.b[r];
            } else {
                mv.kind = PebbleMove::IncBLeaf;
                mv.node = i;
                mv.amount = target.b[i] - seq.configs.back().b[i];
            }
            emit(std::move(mv), t,
                 variant == IndependentVariant::BitwiseThrifty ? "bi_thrifty" : "niro_children");
        } else {
            if (target.b[i] < seq.configs.back().b[i]) {
                PebbleMove mv;
                mv.kind = PebbleMove::DecB;
                mv.node = i;
                mv.amount = seq.configs.back().b[i] - target.b[i];
                emit(std::move(mv), t, "bi_black");
            }
            if (internal) {
                for (int c : {l, r}) {
                    if (target.b[c] > seq.configs.back().b[c])
                        throw analysis_error("bi_black violated: black value increases at a child",
                                             {{"node", c}, {"position", t}});
                    if (target.b[c] < seq.configs.back().b[c]) {
                        PebbleMove mv;
                        mv.kind = PebbleMove::DecB;
                        mv.node = c;
                        mv.amount = seq.configs.back().b[c] - target.b[c];
                        emit(std::move(mv), t, "bi_black");
                    }
                }
            }
        }

        // (3) white increases wherever still needed
        for (int j = 1; j <= shape.node_count(); ++j) {
            if (target.w[j] > seq.configs.back().w[j]) {
                PebbleMove mv;
                mv.kind = PebbleMove::IncW;
                mv.node = j;
                mv.amount = target.w[j] - seq.configs.back().w[j];
                emit(std::move(mv), t, "step3");
            } else if (target.w[j] < seq.configs.back().w[j]) {
                throw analysis_error(std::string(white_prop) +
                                         " violated: a white value overshoots its target",
                                     {{"node", j}, {"position", t}});
            }
        }

        if (!(seq.configs.back() == target))
            throw analysis_error("schedule failed to reach the target configuration",
                                 {{"position", t}});
        // the transition's final configuration is the next state's profile
        if (seq.moves.size() > moves_before) seq.markers.back() = t + 1;
    }

    // final removals: the output state carries the root's black pebble
    for (int j = shape.node_count(); j >= 1; --j) {
        if (seq.configs.back().w[j] != Rat(0))
            throw analysis_error("output state carries white value", {{"node", j}});
        if (seq.configs.back().b[j] != Rat(0)) {
            PebbleMove mv;
            mv.kind = PebbleMove::DecB;
            mv.node = j;
            mv.amount = seq.configs.back().b[j];
            emit(std::move(mv), path.length() - 1, "final");
        }
    }
    return seq;
}

SupercriticalInfo independent_supercritical(const BranchingProgram& bp,
                                            const TepInstance& instance,
                                            const ComputationPath& path,
                                            const StateValueProfile& profile,
                                            IndependentVariant variant) {
    const TreeShape& shape = bp.shape();
    Rat bound(shape.h + 2, 2);  // h/2 + 1
    NodeValues nv = evaluate(instance);

    for (int t = 0; t < path.length(); ++t) {
        int state = path.states[t];
        LogK p = profile.state_value(state);
        if (p >= bound) {
            SupercriticalInfo info;
            info.position = t;
            info.effective = "p = log_k(" + std::to_string(p.num) + "/" + std::to_string(p.den) + ")";
            return info;
        }
    }
    if (variant == IndependentVariant::NodeIndependentRO) {
        for (int t = 0; t + 1 < path.length(); ++t) {
            int state = path.states[t];
            const QueryId& q = bp.state(state).query;
            if (q.kind != QueryId::Func) continue;
            int i = q.node;
            if (q.x != nv.value(shape.left(i)) || q.y != nv.value(shape.right(i))) continue;
            // p - p(2i) - p(2i+1) + 2 = 2 + sum of p(j) over j outside the children
            LogK effective(bp.k(), (unsigned long long)bp.k() * bp.k(), 1);
            for (int j = 1; j <= shape.node_count(); ++j) {
                if (j == shape.left(i) || j == shape.right(i)) continue;
                effective = effective + profile.node_value(state, j);
            }
            if (effective >= bound) {
                SupercriticalInfo info;
                info.position = t;
                info.used_fallback = true;
                info.effective = "p - p(2i) - p(2i+1) + 2 = log_k(" + std::to_string(effective.num) +
                                 "/" + std::to_string(effective.den) + ")";
                return info;
            }
        }
    }
    throw analysis_error("no supercritical state on the path",
                         {{"path", path_ids(bp, path)}, {"bound", bound.str()}});
}

// ---------------------------------------------------------------------------
// censuses

json Census::to_json() const {
    json j = json::object();
    for (const auto& [id, count] : bucket) j[std::to_string(id)] = count;
    j["max"] = max_bucket;
    j["bound"] = bound;
    j["verdict"] = bound_holds ? "pass" : "fail";
    return j;
}

Census bottleneck_census(
    const BranchingProgram& bp, const Rat& exponent,
    const std::function<int(const BranchingProgram&, const TepInstance&, const ComputationPath&)>&
        supercritical,
    const Budget& budget) {
    Census census;
    census.exponent = exponent;
    for_each_instance(bp.shape(), bp.k(), budget, [&](std::uint64_t, const TepInstance& inst) {
        ComputationPath path = canonical_path(bp, inst, budget);
        int state = supercritical(bp, inst, path);
        ++census.bucket[bp.state(state).id];
        ++census.instance_total;
    });
    for (const auto& [id, count] : census.bucket)
        census.max_bucket = std::max(census.max_bucket, count);

    // max <= k^(m - e) and #buckets >= k^e, compared exactly via powers
    std::uint64_t m = TepInstance::slot_count(bp.shape(), bp.k());
    long long p = exponent.num, q = exponent.den;
    if (p < 0 || (long long)m * q < p) throw std::invalid_argument("census exponent out of range");
    auto pow128 = [&](unsigned __int128 base, long long e) {
        unsigned __int128 r = 1;
        for (long long t = 0; t < e; ++t) r = LogK::mul_checked(r, base);
        return r;
    };
    // max^q <= k^(m q - p)
    census.bound_holds =
        pow128(census.max_bucket, q) <= pow128((unsigned)bp.k(), (long long)m * q - p);
    census.floor_holds = pow128(census.bucket.size(), q) >= pow128((unsigned)bp.k(), p);
    census.bound = "k^(" + std::to_string(m) + " - " + exponent.str() + ")";
    return census;
}

int det_thrifty_supercritical_state(const BranchingProgram& bp, const TepInstance&,
                                    const ComputationPath& path) {
    CriticalMap critical = det_thrifty_critical_states(bp, path);
    PebbleSequence seq = det_thrifty_pebbling(bp, path, critical);
    return path.states[supercritical_position(seq, Rat(bp.shape().h))];
}

int ro_thrifty_supercritical_state(const BranchingProgram& bp, const TepInstance&,
                                   const ComputationPath& path, RoMode mode) {
    PebbleSequence seq = ro_thrifty_bw_pebbling(bp, path, mode);
    int e = (bp.shape().h + 1) / 2 + 1;
    return path.states[supercritical_position(seq, Rat(e))];
}

int algorithm1_supercritical_state(const BranchingProgram& bp, const TepInstance& instance,
                                   const ComputationPath& path) {
    AnalysisTrace trace = algorithm1_trace(bp, instance, path);
    int pos = ro_det_supercritical(path, trace);
    if (pos < 0)
        throw analysis_error("path has no state with h pebbles",
                             {{"path", path_ids(bp, path)}});
    return path.states[pos];
}

// ---------------------------------------------------------------------------
// Lemma ident_config, empirical form

namespace {

bool has_gap(const BranchingProgram& bp, const TepInstance& inst, const AnalysisTrace& trace,
             const std::vector<bool>& queried, int pos, int i) {
    const TreeShape& shape = bp.shape();
    if (shape.is_leaf(i)) return !queried[inst.slot_index(QueryId::leaf(i))];
    for (int x = 1; x <= bp.k(); ++x) {
        if (!(trace.range_at(pos, shape.left(i)) >> (x - 1) & 1)) continue;
        for (int y = 1; y <= bp.k(); ++y) {
            if (!(trace.range_at(pos, shape.right(i)) >> (y - 1) & 1)) continue;
            if (!queried[inst.slot_index(QueryId::func(i, x, y))]) return true;
        }
    }
    return false;
}

}  // namespace

Verdict check_ident_config(const BranchingProgram& bp, const Budget& budget) {
    Verdict v;
    v.property = "ident_config";

    struct Visit {
        TepInstance inst;
        ComputationPath path;
        AnalysisTrace trace;
    };
    std::vector<Visit> visits;
    for_each_instance(bp.shape(), bp.k(), budget, [&](std::uint64_t, const TepInstance& inst) {
        ComputationPath path = canonical_path(bp, inst, budget);
        visits.push_back(Visit{inst, path, algorithm1_trace(bp, inst, path)});
    });

    int n = bp.shape().node_count();
    for (size_t a = 0; a < visits.size() && v.pass; ++a) {
        for (size_t b = a + 1; b < visits.size() && v.pass; ++b) {
            for (int pa = 0; pa < visits[a].path.length() && v.pass; ++pa) {
                for (int pb = 0; pb < visits[b].path.length(); ++pb) {
                    if (visits[a].path.states[pa] != visits[b].path.states[pb]) continue;

                    auto queried_before = [&](const Visit& vis, int pos) {
                        std::vector<bool> q(vis.inst.slot_count(), false);
                        for (int t = 0; t < pos; ++t)
                            q[vis.inst.slot_index(bp.state(vis.path.states[t]).query)] = true;
                        return q;
                    };
                    auto qa = queried_before(visits[a], pa);
                    auto qb = queried_before(visits[b], pb);

                    bool all_gaps = true;
                    for (int i = 1; i <= n && all_gaps; ++i) {
                        if (visits[a].trace.active_at(pa, i) &&
                            !has_gap(bp, visits[a].inst, visits[a].trace, qa, pa, i))
                            all_gaps = false;
                        if (visits[b].trace.active_at(pb, i) &&
                            !has_gap(bp, visits[b].inst, visits[b].trace, qb, pb, i))
                            all_gaps = false;
                    }
                    if (!all_gaps) continue;

                    const GreyBlackConfig& ca = visits[a].trace.config_at(pa);
                    const GreyBlackConfig& cb = visits[b].trace.config_at(pb);
                    bool same = ca.black == cb.black && ca.grey.size() == cb.grey.size();
                    if (same) {
                        for (const auto& g : ca.grey) {
                            // match by antecedent; consequents equivalent under both
                            const GreyPebble* partner = nullptr;
                            for (const auto& g2 : cb.grey)
                                if (g2.node == g.node && g2.a == g.a && g2.b == g.b) partner = &g2;
                            if (!partner ||
                                visits[a].trace.class_of(pa, g.node, g.c) !=
                                    visits[a].trace.class_of(pa, g.node, partner->c) ||
                                visits[b].trace.class_of(pb, g.node, g.c) !=
                                    visits[b].trace.class_of(pb, g.node, partner->c)) {
                                same = false;
                                break;
                            }
                        }
                    }
                    if (!same) {
                        v.pass = false;
                        v.detail = "configurations differ at a shared all-gaps state";
                        v.witness = {{"state", bp.state(visits[a].path.states[pa]).id},
                                     {"instance_a", instance_witness(visits[a].inst)},
                                     {"instance_b", instance_witness(visits[b].inst)}};
                        break;
                    }
                }
            }
        }
    }
    return v;
}

// ---------------------------------------------------------------------------
// trace JSON

std::string trace_to_json(const BranchingProgram& bp, const TepInstance& instance,
                          const ComputationPath& path, const AnalysisTrace& trace) {
    int n = bp.shape().node_count();
    json states = json::array();
    for (int pos = 0; pos < path.length(); ++pos) {
        json js;
        js["state"] = bp.state(path.states[pos]).id;
        json ranges = json::object(), classes = json::object(), active = json::object();
        for (int i = 1; i <= n; ++i) {
            ranges[std::to_string(i)] = trace.range_at(pos, i);
            active[std::to_string(i)] = trace.active_at(pos, i);
            json cl = json::array();
            for (int v = 1; v <= bp.k(); ++v) cl.push_back(trace.class_of(pos, i, v));
            classes[std::to_string(i)] = cl;
        }
        js["ranges"] = ranges;
        js["classes"] = classes;
        js["active"] = active;
        const GreyBlackConfig& cfg = trace.config_at(pos);
        json blacks = json::object();
        for (int i = 1; i <= n; ++i)
            if (cfg.black[i]) blacks[std::to_string(i)] = cfg.black[i];
        json greys = json::array();
        for (const auto& g : cfg.grey) greys.push_back({g.node, g.a, g.b, g.c});
        js["config"] = {{"blacks", blacks}, {"greys", greys}};
        states.push_back(js);
    }
    json j;
    j["instance"] = json::parse(instance_to_json(instance));
    j["states"] = states;
    int sc = ro_det_supercritical(path, trace);
    if (sc >= 0) j["supercritical"] = bp.state(path.states[sc]).id;
    return j.dump(2) + "\n";
}

}  // namespace tep
