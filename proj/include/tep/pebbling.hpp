#ifndef TEP_PEBBLING_HPP_
#define TEP_PEBBLING_HPP_

#include <optional>
#include <string>
#include <vector>

#include "tep/tree.hpp"
#include "tep/util.hpp"

namespace tep {

enum class Game { Black, WholeBW, Fractional };

std::string game_name(Game g);
Game game_from_name(const std::string& name);

/// Per-node black/white pebble values, exact rationals with
/// 0 <= b(i), w(i) and b(i)+w(i) <= 1.
struct PebbleConfiguration {
    TreeShape shape;
    std::vector<Rat> b, w;  // indexed by node id, [0] unused

    PebbleConfiguration() = default;
    explicit PebbleConfiguration(TreeShape s)
        : shape(s), b(s.node_count() + 1, Rat(0)), w(s.node_count() + 1, Rat(0)) {}

    Rat total() const {
        Rat t(0);
        for (int i = 1; i <= shape.node_count(); ++i) t = t + b[i] + w[i];
        return t;
    }
    bool fully_pebbled(int i) const { return b[i] + w[i] == Rat(1); }
    bool empty() const { return total() == Rat(0); }

    friend bool operator==(const PebbleConfiguration& x, const PebbleConfiguration& y) {
        return x.b == y.b && x.w == y.w;
    }
};

struct PebbleMove {
    enum Kind {
        PlaceBlackLeaf,   // black game: b(i) 0 -> 1, i leaf
        BlackSlide,       // black game: children pebbled; b(i) -> 1, clear subset
        RemovePebble,     // black game: b(i) 1 -> 0
        IncW,             // any node: w(i) += amount
        DecB,             // any node: b(i) -= amount
        IncBLeaf,         // leaf: b(i) += amount
        DecWLeaf,         // leaf: w(i) -= amount
        IncBInternal,     // children fully pebbled; b(i) += amount, children b -= dec_left/right
        DecWInternal      // children fully pebbled; w(i) -= amount
    } kind = PlaceBlackLeaf;
    int node = 0;
    Rat amount = Rat(1);
    Rat dec_left = Rat(0);   // IncBInternal only
    Rat dec_right = Rat(0);
    std::vector<int> clear;  // BlackSlide only: children to clear

    std::string str() const;
};

/// Configurations with the move between each adjacent pair. An optional
/// marker per configuration lets the trace analyses tie configurations to
/// branching-program states.
struct PebbleSequence {
    Game game = Game::Black;
    int denominator = 1;
    TreeShape shape;
    std::vector<PebbleConfiguration> configs;
    std::vector<PebbleMove> moves;        // moves.size() == configs.size() - 1
    std::vector<int> markers;             // optional; -1 = none; parallel to configs

    Rat max_pebbles() const;
};

struct MoveError {
    bool ok = true;
    std::string rule;  // violated rule, when !ok
};

// Applies the move if legal; on failure returns the violated rule.
MoveError apply_move(const PebbleConfiguration& config, const PebbleMove& move, Game game,
                     PebbleConfiguration& out);

struct SequenceVerdict {
    bool ok = true;
    int first_bad_index = -1;  // config index of the violation, or -1
    std::string rule;
};

// Checks initial/final conditions per game and every transition.
SequenceVerdict validate_sequence(const PebbleSequence& seq);

// The standard recursion: pebble left subtree root, pebble right, slide to
// the parent. Uses exactly h pebbles.
PebbleSequence optimal_black_sequence(int h);

struct PebbleSearchResult {
    Rat minimum;
    PebbleSequence witness;
};

// Minimum over valid sequences of the max configuration cost, by
// budget-bounded reachability over (configuration, root-was-fully-black),
// budget raised by 1/d until a valid sequence exists.
PebbleSearchResult min_pebble_number(Game game, int h, int denominator = 2,
                                     const Budget& budget = Budget{});

std::string pebbling_to_json(const PebbleSequence& seq);
PebbleSequence pebbling_from_json(const std::string& text);

}  // namespace tep

#endif  // TEP_PEBBLING_HPP_
