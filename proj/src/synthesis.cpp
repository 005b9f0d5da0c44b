#include "tep/synthesis.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace tep {

namespace {

// Memory carried by a compiled state: the values of the currently pebbled
// nodes (black = verified, white = guessed), plus the answer once the root
// has held a full black pebble. The answer survives later root removals.
struct Memory {
    std::map<int, int> values;
    int answer = 0;  // 0 = not yet determined

    friend bool operator<(const Memory& a, const Memory& b) {
        if (a.answer != b.answer) return a.answer < b.answer;
        return a.values < b.values;
    }
};

bool is_query_move(const PebbleMove& m) {
    switch (m.kind) {
        case PebbleMove::PlaceBlackLeaf:
        case PebbleMove::BlackSlide:
        case PebbleMove::IncBLeaf:
        case PebbleMove::IncBInternal:
        case PebbleMove::DecWLeaf:
        case PebbleMove::DecWInternal:
            return true;
        default:
            return false;
    }
}

// Applies a non-query move to a set of memories. IncW multiplies each memory
// by the k possible guesses; removals project.
void apply_silent_move(const PebbleMove& m, int k, std::vector<Memory>& memories) {
    switch (m.kind) {
        case PebbleMove::RemovePebble:
        case PebbleMove::DecB:
            for (auto& mem : memories) mem.values.erase(m.node);
            return;
        case PebbleMove::IncW: {
            std::vector<Memory> expanded;
            expanded.reserve(memories.size() * k);
            for (const auto& mem : memories)
                for (int g = 1; g <= k; ++g) {
                    Memory next = mem;
                    next.values[m.node] = g;
                    expanded.push_back(std::move(next));
                }
            memories = std::move(expanded);
            return;
        }
        default:
            throw std::logic_error("query move fed to apply_silent_move");
    }
}

struct QueryPlan {
    QueryId query;
    bool keep_guess_only = false;  // white removal: keep only the guessed label
};

QueryPlan plan_query(const PebbleMove& m, const Memory& mem, const TreeShape& shape) {
    switch (m.kind) {
        case PebbleMove::PlaceBlackLeaf:
        case PebbleMove::IncBLeaf:
            return {QueryId::leaf(m.node), false};
        case PebbleMove::DecWLeaf:
            return {QueryId::leaf(m.node), true};
        case PebbleMove::BlackSlide:
        case PebbleMove::IncBInternal:
        case PebbleMove::DecWInternal: {
            auto l = mem.values.find(shape.left(m.node));
            auto r = mem.values.find(shape.right(m.node));
            if (l == mem.values.end() || r == mem.values.end())
                throw std::logic_error("internal query without remembered children");
            return {QueryId::func(m.node, l->second, r->second),
                    m.kind == PebbleMove::DecWInternal};
        }
        default:
            throw std::logic_error("non-query move fed to plan_query");
    }
}

// Memory after the query move is answered with `a`.
Memory apply_query_result(const PebbleMove& m, const Memory& mem, int a, const TreeShape& shape) {
    Memory next = mem;
    switch (m.kind) {
        case PebbleMove::PlaceBlackLeaf:
        case PebbleMove::IncBLeaf:
            next.values[m.node] = a;
            break;
        case PebbleMove::BlackSlide:
            next.values[m.node] = a;
            for (int c : m.clear) next.values.erase(c);
            break;
        case PebbleMove::IncBInternal:
            next.values[m.node] = a;
            if (m.dec_left == Rat(1)) next.values.erase(shape.left(m.node));
            if (m.dec_right == Rat(1)) next.values.erase(shape.right(m.node));
            break;
        case PebbleMove::DecWLeaf:
        case PebbleMove::DecWInternal:
            next.values.erase(m.node);  // verified guess; label a equals the guess
            break;
        default:
            throw std::logic_error("non-query move fed to apply_query_result");
    }
    if (m.node == 1 &&
        (m.kind == PebbleMove::BlackSlide || m.kind == PebbleMove::IncBInternal))
        next.answer = a;
    return next;
}

BranchingProgram compile(const PebbleSequence& seq, int k) {
    SequenceVerdict sv = validate_sequence(seq);
    if (!sv.ok)
        throw std::invalid_argument("pebbling sequence invalid at index " +
                                    std::to_string(sv.first_bad_index) + ": " + sv.rule);

    const TreeShape& shape = seq.shape;
    BranchingProgram bp(shape, k);

    std::vector<int> query_steps;
    for (size_t t = 0; t < seq.moves.size(); ++t)
        if (is_query_move(seq.moves[t])) query_steps.push_back((int)t);
    if (query_steps.empty())
        throw std::invalid_argument("sequence contains no query-generating move");

    struct Slot {
        int bp_index;
        Memory memory;
    };
    std::vector<Slot> layer;
    int next_id = 0;

    // guesses made before the first query fold into the first layer's edges;
    // the single start state keeps an empty memory
    {
        std::vector<Memory> variants{Memory{}};
        for (int t = 0; t < query_steps[0]; ++t) apply_silent_move(seq.moves[t], k, variants);
        QueryPlan plan = plan_query(seq.moves[query_steps[0]], variants[0], shape);
        for (size_t vi = 1; vi < variants.size(); ++vi)
            if (!(plan_query(seq.moves[query_steps[0]], variants[vi], shape).query == plan.query))
                throw std::invalid_argument(
                    "cannot fold initial guesses into a memory-dependent first query");
        int idx = bp.add_query_state(next_id++, plan.query);
        bp.set_start(idx);
        for (auto& mem : variants) layer.push_back(Slot{idx, std::move(mem)});
        bp.layers.push_back(LayerInfo{0, 0, 1});
    }

    for (size_t qi = 0; qi < query_steps.size(); ++qi) {
        int t = query_steps[qi];
        const PebbleMove& move = seq.moves[t];
        bool last = qi + 1 == query_steps.size();
        int next_query_t = last ? (int)seq.moves.size() : query_steps[qi + 1];

        struct Pending {
            int from;
            int label;
            Memory target;
        };
        std::vector<Pending> outgoing;
        for (const auto& slot : layer) {
            QueryPlan plan = plan_query(move, slot.memory, shape);
            for (int a = 1; a <= k; ++a) {
                if (plan.keep_guess_only && a != slot.memory.values.at(move.node)) continue;
                std::vector<Memory> succ{apply_query_result(move, slot.memory, a, shape)};
                for (int u = t + 1; u < next_query_t; ++u) apply_silent_move(seq.moves[u], k, succ);
                for (auto& mem : succ) outgoing.push_back(Pending{slot.bp_index, a, std::move(mem)});
            }
        }

        if (last) {
            std::vector<int> out_index(k + 1, -1);
            for (int a = 1; a <= k; ++a) out_index[a] = bp.add_output_state(next_id++, a);
            for (const auto& e : outgoing) {
                if (e.target.answer == 0)
                    throw std::invalid_argument("sequence never derives the root value");
                bp.add_edge(e.from, e.label, out_index[e.target.answer]);
            }
        } else {
            const PebbleMove& next_move = seq.moves[next_query_t];
            std::map<Memory, int> index_of;
            std::vector<Slot> next_layer;
            for (const auto& e : outgoing) {
                auto it = index_of.find(e.target);
                if (it == index_of.end()) {
                    QueryPlan plan = plan_query(next_move, e.target, shape);
                    int idx = bp.add_query_state(next_id++, plan.query);
                    it = index_of.emplace(e.target, idx).first;
                    next_layer.push_back(Slot{idx, e.target});
                }
                bp.add_edge(e.from, e.label, it->second);
            }
            bp.layers.push_back(LayerInfo{(int)qi + 1,
                                          (int)next_layer.front().memory.values.size(),
                                          (int)next_layer.size()});
            layer = std::move(next_layer);
        }
    }
    bp.finalize();
    return bp;
}

}  // namespace

BranchingProgram compile_black(const PebbleSequence& seq, int k) {
    if (seq.game != Game::Black)
        throw std::invalid_argument("compile_black requires a black-game sequence");
    return compile(seq, k);
}

BranchingProgram compile_bw(const PebbleSequence& seq, int k) {
    if (seq.game != Game::WholeBW)
        throw std::invalid_argument("compile_bw requires a whole black-white sequence");
    return compile(seq, k);
}

SizeReport size_report(const BranchingProgram& bp) {
    if (bp.layers.empty())
        throw std::invalid_argument("size_report requires compiler layer metadata");
    SizeReport rep;
    rep.layers = bp.layers;
    rep.total_states = bp.state_count();
    for (int i = 0; i < bp.state_count(); ++i)
        if (bp.state(i).is_output) ++rep.output_states;
    rep.exponent = std::log((double)rep.total_states) / std::log((double)bp.k());
    return rep;
}

std::string SizeReport::str() const {
    std::ostringstream os;
    os << "layers:";
    for (const auto& l : layers)
        os << " [step " << l.step << ": pebbles " << l.pebbles << ", width " << l.width << "]";
    os << "; outputs " << output_states << "; total " << total_states;
    os << "; log_k(total) = " << exponent;
    return os.str();
}

}  // namespace tep
