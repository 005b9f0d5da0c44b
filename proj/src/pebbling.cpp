#include "tep/pebbling.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace tep {

using nlohmann::json;

std::string game_name(Game g) {
    switch (g) {
        case Game::Black: return "black";
        case Game::WholeBW: return "whole";
        case Game::Fractional: return "fractional";
    }
    return "?";
}

Game game_from_name(const std::string& name) {
    if (name == "black") return Game::Black;
    if (name == "whole") return Game::WholeBW;
    if (name == "fractional") return Game::Fractional;
    throw std::invalid_argument("unknown game: " + name);
}

std::string PebbleMove::str() const {
    std::ostringstream os;
    switch (kind) {
        case PlaceBlackLeaf: os << "place_black_leaf(" << node << ")"; break;
        case BlackSlide: {
            os << "black_slide(" << node << ", clear={";
            for (size_t j = 0; j < clear.size(); ++j) os << (j ? "," : "") << clear[j];
            os << "})";
            break;
        }
        case RemovePebble: os << "remove(" << node << ")"; break;
        case IncW: os << "inc_w(" << node << ", " << amount.str() << ")"; break;
        case DecB: os << "dec_b(" << node << ", " << amount.str() << ")"; break;
        case IncBLeaf: os << "inc_b_leaf(" << node << ", " << amount.str() << ")"; break;
        case DecWLeaf: os << "dec_w_leaf(" << node << ", " << amount.str() << ")"; break;
        case IncBInternal:
            os << "inc_b_internal(" << node << ", " << amount.str() << ", dec=("
               << dec_left.str() << "," << dec_right.str() << "))";
            break;
        case DecWInternal: os << "dec_w_internal(" << node << ", " << amount.str() << ")"; break;
    }
    return os.str();
}

Rat PebbleSequence::max_pebbles() const {
    Rat best(0);
    for (const auto& c : configs) {
        Rat t = c.total();
        if (t > best) best = t;
    }
    return best;
}

namespace {

MoveError fail(const std::string& rule) { return MoveError{false, rule}; }

bool black_kind(PebbleMove::Kind k) {
    return k == PebbleMove::PlaceBlackLeaf || k == PebbleMove::BlackSlide ||
           k == PebbleMove::RemovePebble;
}

}  // namespace

MoveError apply_move(const PebbleConfiguration& config, const PebbleMove& move, Game game,
                     PebbleConfiguration& out) {
    const TreeShape& shape = config.shape;
    int i = move.node;
    if (!shape.valid_node(i)) return fail("node id out of range");
    if (game == Game::Black && !black_kind(move.kind))
        return fail("move kind not allowed in the black game");
    if (game != Game::Black && black_kind(move.kind))
        return fail("black-game move kind not allowed in the black-white games");
    if (game == Game::WholeBW && !black_kind(move.kind)) {
        if (move.amount != Rat(1)) return fail("whole game moves change values by exactly 1");
        if (move.kind == PebbleMove::IncBInternal &&
            (!(move.dec_left == Rat(0) || move.dec_left == Rat(1)) ||
             !(move.dec_right == Rat(0) || move.dec_right == Rat(1))))
            return fail("whole game child decrements must be 0 or 1");
    }

    out = config;
    switch (move.kind) {
        case PebbleMove::PlaceBlackLeaf:
            if (!shape.is_leaf(i)) return fail("black pebbles may only be placed on leaves");
            if (config.b[i] != Rat(0)) return fail("node already pebbled");
            out.b[i] = Rat(1);
            return {};
        case PebbleMove::BlackSlide: {
            if (!shape.is_internal(i)) return fail("sliding move requires an internal node");
            for (int c : {shape.left(i), shape.right(i)})
                if (config.b[c] != Rat(1))
                    return fail("child " + std::to_string(c) + " not fully pebbled");
            if (config.b[i] != Rat(0)) return fail("node already pebbled");
            out.b[i] = Rat(1);
            for (int c : move.clear) {
                if (c != shape.left(i) && c != shape.right(i))
                    return fail("sliding move may only clear children of the pebbled node");
                out.b[c] = Rat(0);
            }
            return {};
        }
        case PebbleMove::RemovePebble:
            if (config.b[i] != Rat(1)) return fail("no pebble to remove");
            out.b[i] = Rat(0);
            return {};
        case PebbleMove::IncW:
            if (move.amount <= Rat(0)) return fail("amount must be positive");
            out.w[i] = config.w[i] + move.amount;
            if (out.b[i] + out.w[i] > Rat(1)) return fail("b(i)+w(i) exceeds 1");
            return {};
        case PebbleMove::DecB:
            if (move.amount <= Rat(0)) return fail("amount must be positive");
            if (config.b[i] < move.amount) return fail("black value would drop below 0");
            out.b[i] = config.b[i] - move.amount;
            return {};
        case PebbleMove::IncBLeaf:
            if (!shape.is_leaf(i)) return fail("black increase outside a slide requires a leaf");
            if (move.amount <= Rat(0)) return fail("amount must be positive");
            out.b[i] = config.b[i] + move.amount;
            if (out.b[i] + out.w[i] > Rat(1)) return fail("b(i)+w(i) exceeds 1");
            return {};
        case PebbleMove::DecWLeaf:
            if (!shape.is_leaf(i)) return fail("unconditional white decrease requires a leaf");
            if (move.amount <= Rat(0)) return fail("amount must be positive");
            if (config.w[i] < move.amount) return fail("white value would drop below 0");
            out.w[i] = config.w[i] - move.amount;
            return {};
        case PebbleMove::IncBInternal: {
            if (!shape.is_internal(i)) return fail("internal black increase requires an internal node");
            if (move.amount <= Rat(0)) return fail("amount must be positive");
            int l = shape.left(i), r = shape.right(i);
            if (!config.fully_pebbled(l)) return fail("child " + std::to_string(l) + " not fully pebbled");
            if (!config.fully_pebbled(r)) return fail("child " + std::to_string(r) + " not fully pebbled");
            if (config.b[l] < move.dec_left || config.b[r] < move.dec_right)
                return fail("child black value would drop below 0");
            out.b[i] = config.b[i] + move.amount;
            if (out.b[i] + out.w[i] > Rat(1)) return fail("b(i)+w(i) exceeds 1");
            out.b[l] = config.b[l] - move.dec_left;
            out.b[r] = config.b[r] - move.dec_right;
            return {};
        }
        case PebbleMove::DecWInternal: {
            if (!shape.is_internal(i)) return fail("internal white decrease requires an internal node");
            if (move.amount <= Rat(0)) return fail("amount must be positive");
            int l = shape.left(i), r = shape.right(i);
            if (!config.fully_pebbled(l)) return fail("child " + std::to_string(l) + " not fully pebbled");
            if (!config.fully_pebbled(r)) return fail("child " + std::to_string(r) + " not fully pebbled");
            if (config.w[i] < move.amount) return fail("white value would drop below 0");
            out.w[i] = config.w[i] - move.amount;
            return {};
        }
    }
    return fail("unknown move kind");
}

namespace {

SequenceVerdict seq_fail(int index, const std::string& rule) {
    return SequenceVerdict{false, index, rule};
}

bool lone_root_black(const PebbleConfiguration& c) {
    if (c.b[1] != Rat(1) || c.w[1] != Rat(0)) return false;
    for (int i = 2; i <= c.shape.node_count(); ++i)
        if (c.b[i] != Rat(0) || c.w[i] != Rat(0)) return false;
    return true;
}

bool domain_ok(const PebbleConfiguration& c, Game game) {
    for (int i = 1; i <= c.shape.node_count(); ++i) {
        if (c.b[i] < Rat(0) || c.w[i] < Rat(0) || c.b[i] + c.w[i] > Rat(1)) return false;
        if (game == Game::Black && (c.w[i] != Rat(0) || (c.b[i] != Rat(0) && c.b[i] != Rat(1))))
            return false;
        if (game == Game::WholeBW &&
            ((c.b[i] != Rat(0) && c.b[i] != Rat(1)) || (c.w[i] != Rat(0) && c.w[i] != Rat(1))))
            return false;
    }
    return true;
}

}  // namespace

SequenceVerdict validate_sequence(const PebbleSequence& seq) {
    if (seq.configs.empty()) return seq_fail(0, "sequence has no configurations");
    if (seq.moves.size() + 1 != seq.configs.size())
        return seq_fail(0, "move count must be one less than configuration count");
    if (!seq.configs.front().empty()) return seq_fail(0, "first configuration not empty");

    for (size_t t = 0; t < seq.configs.size(); ++t)
        if (!domain_ok(seq.configs[t], seq.game))
            return seq_fail((int)t, "configuration outside the game's value domain");

    bool root_black = false;
    for (size_t t = 0; t < seq.moves.size(); ++t) {
        PebbleConfiguration next;
        MoveError err = apply_move(seq.configs[t], seq.moves[t], seq.game, next);
        if (!err.ok) return seq_fail((int)t + 1, err.rule);
        if (!(next == seq.configs[t + 1]))
            return seq_fail((int)t + 1, "stored configuration does not match the applied move");
        if (next.b[1] == Rat(1)) root_black = true;
    }

    if (seq.game == Game::Black) {
        if (!lone_root_black(seq.configs.back()))
            return seq_fail((int)seq.configs.size() - 1,
                            "last configuration must be a lone black pebble on the root");
    } else {
        if (!seq.configs.back().empty())
            return seq_fail((int)seq.configs.size() - 1, "sequence must begin and end with empty configurations");
        if (!root_black && !(seq.configs.front().b[1] == Rat(1)))
            return seq_fail(-1, "no configuration gives the root a full black pebble");
    }
    return {};
}

namespace {

void push_config(PebbleSequence& seq, const PebbleMove& move, const PebbleConfiguration& next) {
    seq.moves.push_back(move);
    seq.configs.push_back(next);
}

void pebble_subtree(PebbleSequence& seq, int node) {
    const TreeShape& shape = seq.shape;
    PebbleConfiguration cur = seq.configs.back();
    if (shape.is_leaf(node)) {
        PebbleMove mv;
        mv.kind = PebbleMove::PlaceBlackLeaf;
        mv.node = node;
        PebbleConfiguration next;
        apply_move(cur, mv, Game::Black, next);
        push_config(seq, mv, next);
        return;
    }
    pebble_subtree(seq, shape.left(node));
    pebble_subtree(seq, shape.right(node));
    PebbleMove mv;
    mv.kind = PebbleMove::BlackSlide;
    mv.node = node;
    mv.clear = {shape.left(node), shape.right(node)};
    PebbleConfiguration next;
    MoveError err = apply_move(seq.configs.back(), mv, Game::Black, next);
    if (!err.ok) throw std::logic_error("optimal_black_sequence produced an illegal move: " + err.rule);
    push_config(seq, mv, next);
}

}  // namespace

PebbleSequence optimal_black_sequence(int h) {
    TreeShape shape(h);
    PebbleSequence seq;
    seq.game = Game::Black;
    seq.denominator = 1;
    seq.shape = shape;
    seq.configs.push_back(PebbleConfiguration(shape));
    pebble_subtree(seq, 1);
    seq.markers.assign(seq.configs.size(), -1);
    return seq;
}

// ---------------------------------------------------------------------------
// Budget-bounded reachability search for minimum pebble numbers.
// Configurations are quantized in units of 1/d and packed into 64 bits
// together with the root-was-fully-black flag.

namespace {

struct SearchSpec {
    Game game;
    TreeShape shape;
    int d;          // units per full pebble
    int bits;       // bits per node
    int nodes;

    SearchSpec(Game g, int h, int denominator) : game(g), shape(h) {
        d = (g == Game::Fractional) ? denominator : 1;
        nodes = shape.node_count();
        int codes = (d + 1) * (d + 1);
        bits = 1;
        while ((1 << bits) < codes) ++bits;
        if (nodes * bits + 1 > 64)
            throw budget_error("pebbling search state does not fit in 64 bits; lower h or d");
    }

    // units of b and w per node, node-indexed from 1
    std::uint64_t encode(const std::vector<int>& b, const std::vector<int>& w, bool flag) const {
        std::uint64_t key = flag ? 1 : 0;
        for (int i = 1; i <= nodes; ++i) {
            std::uint64_t code = (std::uint64_t)(b[i] * (d + 1) + w[i]);
            key |= code << (1 + (i - 1) * bits);
        }
        return key;
    }
    void decode(std::uint64_t key, std::vector<int>& b, std::vector<int>& w, bool& flag) const {
        flag = key & 1;
        b.assign(nodes + 1, 0);
        w.assign(nodes + 1, 0);
        std::uint64_t mask = (1ull << bits) - 1;
        for (int i = 1; i <= nodes; ++i) {
            int code = (int)((key >> (1 + (i - 1) * bits)) & mask);
            b[i] = code / (d + 1);
            w[i] = code % (d + 1);
        }
    }

    PebbleConfiguration to_config(const std::vector<int>& b, const std::vector<int>& w) const {
        PebbleConfiguration c(shape);
        for (int i = 1; i <= nodes; ++i) {
            c.b[i] = Rat(b[i], d);
            c.w[i] = Rat(w[i], d);
        }
        return c;
    }
};

struct Candidate {
    PebbleMove move;
    std::vector<int> b, w;
    int total;
};

// All legal successor unit-configurations, in a fixed lexicographic move
// order so witnesses are reproducible.
void generate_moves(const SearchSpec& spec, const std::vector<int>& b, const std::vector<int>& w,
                    std::vector<Candidate>& out) {
    out.clear();
    const TreeShape& shape = spec.shape;
    int d = spec.d;
    int total = 0;
    for (int i = 1; i <= spec.nodes; ++i) total += b[i] + w[i];

    auto push = [&](PebbleMove mv, std::vector<int> nb, std::vector<int> nw) {
        int t = 0;
        for (int i = 1; i <= spec.nodes; ++i) t += nb[i] + nw[i];
        out.push_back(Candidate{std::move(mv), std::move(nb), std::move(nw), t});
    };

    for (int i = 1; i <= spec.nodes; ++i) {
        bool leaf = shape.is_leaf(i);
        int l = leaf ? 0 : shape.left(i), r = leaf ? 0 : shape.right(i);
        bool children_full = !leaf && b[l] + w[l] == d && b[r] + w[r] == d;

        if (spec.game == Game::Black) {
            if (leaf && b[i] == 0) {
                PebbleMove mv;
                mv.kind = PebbleMove::PlaceBlackLeaf;
                mv.node = i;
                auto nb = b;
                nb[i] = 1;
                push(mv, nb, w);
            }
            if (!leaf && b[i] == 0 && b[l] == 1 && b[r] == 1) {
                const std::vector<std::vector<int>> clears = {{l, r}, {l}, {r}, {}};
                for (const auto& clear : clears) {
                    PebbleMove mv;
                    mv.kind = PebbleMove::BlackSlide;
                    mv.node = i;
                    mv.clear = clear;
                    auto nb = b;
                    nb[i] = 1;
                    for (int c : clear) nb[c] = 0;
                    push(mv, nb, w);
                }
            }
            if (b[i] == 1) {
                PebbleMove mv;
                mv.kind = PebbleMove::RemovePebble;
                mv.node = i;
                auto nb = b;
                nb[i] = 0;
                push(mv, nb, w);
            }
            continue;
        }

        // black-white games; amounts in units of 1/d
        for (int delta = 1; delta <= d - b[i] - w[i]; ++delta) {
            PebbleMove mv;
            mv.kind = PebbleMove::IncW;
            mv.node = i;
            mv.amount = Rat(delta, d);
            auto nw = w;
            nw[i] += delta;
            push(mv, b, nw);
        }
        for (int delta = 1; delta <= b[i]; ++delta) {
            PebbleMove mv;
            mv.kind = PebbleMove::DecB;
            mv.node = i;
            mv.amount = Rat(delta, d);
            auto nb = b;
            nb[i] -= delta;
            push(mv, nb, w);
        }
        if (leaf) {
            for (int delta = 1; delta <= d - b[i] - w[i]; ++delta) {
                PebbleMove mv;
                mv.kind = PebbleMove::IncBLeaf;
                mv.node = i;
                mv.amount = Rat(delta, d);
                auto nb = b;
                nb[i] += delta;
                push(mv, nb, w);
            }
            for (int delta = 1; delta <= w[i]; ++delta) {
                PebbleMove mv;
                mv.kind = PebbleMove::DecWLeaf;
                mv.node = i;
                mv.amount = Rat(delta, d);
                auto nw = w;
                nw[i] -= delta;
                push(mv, b, nw);
            }
        } else if (children_full) {
            for (int delta = 1; delta <= d - b[i] - w[i]; ++delta)
                for (int dl = 0; dl <= b[l]; ++dl)
                    for (int dr = 0; dr <= b[r]; ++dr) {
                        PebbleMove mv;
                        mv.kind = PebbleMove::IncBInternal;
                        mv.node = i;
                        mv.amount = Rat(delta, d);
                        mv.dec_left = Rat(dl, d);
                        mv.dec_right = Rat(dr, d);
                        auto nb = b;
                        nb[i] += delta;
                        nb[l] -= dl;
                        nb[r] -= dr;
                        push(mv, nb, w);
                    }
            for (int delta = 1; delta <= w[i]; ++delta) {
                PebbleMove mv;
                mv.kind = PebbleMove::DecWInternal;
                mv.node = i;
                mv.amount = Rat(delta, d);
                auto nw = w;
                nw[i] -= delta;
                push(mv, b, nw);
            }
        }
    }
}

struct ParentLink {
    std::uint64_t parent;
    PebbleMove move;
};

}  // namespace

PebbleSearchResult min_pebble_number(Game game, int h, int denominator, const Budget& budget) {
    if (game != Game::Fractional) denominator = 1;
    if (denominator < 1) throw std::invalid_argument("denominator must be >= 1");
    SearchSpec spec(game, h, denominator);
    int d = spec.d;

    std::vector<int> b0(spec.nodes + 1, 0), w0(spec.nodes + 1, 0);
    std::uint64_t initial = spec.encode(b0, w0, false);

    auto is_goal = [&](const std::vector<int>& b, const std::vector<int>& w, bool flag) {
        if (game == Game::Black) {
            if (b[1] != d) return false;
            for (int i = 1; i <= spec.nodes; ++i) {
                if (w[i] != 0) return false;
                if (i > 1 && b[i] != 0) return false;
            }
            return true;
        }
        if (!flag) return false;
        for (int i = 1; i <= spec.nodes; ++i)
            if (b[i] != 0 || w[i] != 0) return false;
        return true;
    };

    int max_units = (h + 2) * d;
    for (int units = 1; units <= max_units; ++units) {
        std::unordered_map<std::uint64_t, ParentLink> visited;
        std::deque<std::uint64_t> frontier;
        visited.emplace(initial, ParentLink{initial, PebbleMove{}});
        frontier.push_back(initial);

        std::vector<int> b, w;
        std::vector<Candidate> cands;
        std::uint64_t goal_key = 0;
        bool found = false;

        while (!frontier.empty() && !found) {
            std::uint64_t key = frontier.front();
            frontier.pop_front();
            bool flag;
            spec.decode(key, b, w, flag);
            generate_moves(spec, b, w, cands);
            for (const auto& cand : cands) {
                if (cand.total > units) continue;
                bool nflag = flag || cand.b[1] == d;
                std::uint64_t nkey = spec.encode(cand.b, cand.w, nflag);
                if (visited.count(nkey)) continue;
                visited.emplace(nkey, ParentLink{key, cand.move});
                if (visited.size() > budget.search_state_cap)
                    throw budget_error("pebbling search exceeded the state-space cap");
                if (is_goal(cand.b, cand.w, nflag)) {
                    goal_key = nkey;
                    found = true;
                    break;
                }
                frontier.push_back(nkey);
            }
        }

        if (found) {
            // rebuild the move chain, then replay it into a sequence
            std::vector<PebbleMove> chain;
            std::uint64_t key = goal_key;
            while (key != initial) {
                const ParentLink& link = visited.at(key);
                chain.push_back(link.move);
                key = link.parent;
            }
            std::reverse(chain.begin(), chain.end());

            PebbleSequence seq;
            seq.game = game;
            seq.denominator = d;
            seq.shape = spec.shape;
            seq.configs.push_back(PebbleConfiguration(spec.shape));
            for (const auto& mv : chain) {
                PebbleConfiguration next;
                MoveError err = apply_move(seq.configs.back(), mv, game, next);
                if (!err.ok) throw std::logic_error("search produced an illegal move: " + err.rule);
                seq.configs.push_back(next);
                seq.moves.push_back(mv);
            }
            seq.markers.assign(seq.configs.size(), -1);
            return PebbleSearchResult{Rat(units, d), std::move(seq)};
        }
    }
    throw budget_error("no valid pebbling found within the budget ceiling");
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json config_to_json(const PebbleConfiguration& c) {
    json j = json::object();
    for (int i = 1; i <= c.shape.node_count(); ++i) {
        if (c.b[i] == Rat(0) && c.w[i] == Rat(0)) continue;
        j[std::to_string(i)] = {{"b", c.b[i].str()}, {"w", c.w[i].str()}};
    }
    return j;
}

json move_to_json(const PebbleMove& m) {
    json j;
    switch (m.kind) {
        case PebbleMove::PlaceBlackLeaf: j["type"] = "place_black_leaf"; break;
        case PebbleMove::BlackSlide: j["type"] = "black_slide"; j["clear"] = m.clear; break;
        case PebbleMove::RemovePebble: j["type"] = "remove"; break;
        case PebbleMove::IncW: j["type"] = "inc_w"; break;
        case PebbleMove::DecB: j["type"] = "dec_b"; break;
        case PebbleMove::IncBLeaf: j["type"] = "inc_b_leaf"; break;
        case PebbleMove::DecWLeaf: j["type"] = "dec_w_leaf"; break;
        case PebbleMove::IncBInternal:
            j["type"] = "inc_b_internal";
            j["dec_left"] = m.dec_left.str();
            j["dec_right"] = m.dec_right.str();
            break;
        case PebbleMove::DecWInternal: j["type"] = "dec_w_internal"; break;
    }
    j["node"] = m.node;
    if (m.kind != PebbleMove::PlaceBlackLeaf && m.kind != PebbleMove::BlackSlide &&
        m.kind != PebbleMove::RemovePebble)
        j["amount"] = m.amount.str();
    return j;
}

PebbleMove move_from_json(const json& j) {
    PebbleMove m;
    std::string type = j.at("type").get<std::string>();
    m.node = j.at("node").get<int>();
    if (type == "place_black_leaf") m.kind = PebbleMove::PlaceBlackLeaf;
    else if (type == "black_slide") {
        m.kind = PebbleMove::BlackSlide;
        m.clear = j.at("clear").get<std::vector<int>>();
    } else if (type == "remove") m.kind = PebbleMove::RemovePebble;
    else if (type == "inc_w") m.kind = PebbleMove::IncW;
    else if (type == "dec_b") m.kind = PebbleMove::DecB;
    else if (type == "inc_b_leaf") m.kind = PebbleMove::IncBLeaf;
    else if (type == "dec_w_leaf") m.kind = PebbleMove::DecWLeaf;
    else if (type == "inc_b_internal") {
        m.kind = PebbleMove::IncBInternal;
        m.dec_left = parse_rat(j.at("dec_left").get<std::string>());
        m.dec_right = parse_rat(j.at("dec_right").get<std::string>());
    } else if (type == "dec_w_internal") m.kind = PebbleMove::DecWInternal;
    else throw std::invalid_argument("unknown move type: " + type);
    if (j.contains("amount")) m.amount = parse_rat(j.at("amount").get<std::string>());
    return m;
}

}  // namespace

std::string pebbling_to_json(const PebbleSequence& seq) {
    json j;
    j["game"] = game_name(seq.game);
    j["d"] = seq.denominator;
    j["h"] = seq.shape.h;
    json configs = json::array();
    for (const auto& c : seq.configs) configs.push_back(config_to_json(c));
    j["configs"] = configs;
    json moves = json::array();
    for (const auto& m : seq.moves) moves.push_back(move_to_json(m));
    j["moves"] = moves;
    return j.dump(2) + "\n";
}

PebbleSequence pebbling_from_json(const std::string& text) {
    json j = json::parse(text);
    PebbleSequence seq;
    seq.game = game_from_name(j.at("game").get<std::string>());
    seq.denominator = j.at("d").get<int>();
    seq.shape = TreeShape(j.at("h").get<int>());
    for (const auto& cj : j.at("configs")) {
        PebbleConfiguration c(seq.shape);
        for (auto it = cj.begin(); it != cj.end(); ++it) {
            int node = std::stoi(it.key());
            if (!seq.shape.valid_node(node)) throw std::invalid_argument("bad node id in config");
            c.b[node] = parse_rat(it.value().at("b").get<std::string>());
            c.w[node] = parse_rat(it.value().at("w").get<std::string>());
        }
        seq.configs.push_back(std::move(c));
    }
    for (const auto& mj : j.at("moves")) seq.moves.push_back(move_from_json(mj));
    seq.markers.assign(seq.configs.size(), -1);
    return seq;
}

}  // namespace tep
