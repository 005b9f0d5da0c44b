#ifndef TEP_SYNTHESIS_HPP_
#define TEP_SYNTHESIS_HPP_

#include <string>
#include <vector>

#include "tep/branching_program.hpp"
#include "tep/pebbling.hpp"

namespace tep {

// Deterministic program from a valid black pebbling: one state per
// (query step, assignment of values to the pebbled nodes); placements query
// leaves, slides query the remembered child values, removals project memory.
BranchingProgram compile_black(const PebbleSequence& seq, int k);

// Nondeterministic program from a valid whole black-white pebbling. White
// placements become guesses folded into the preceding layer's out-edges as
// duplicate same-label edges; white removals become verification queries
// keeping only the guessed label.
BranchingProgram compile_bw(const PebbleSequence& seq, int k);

struct SizeReport {
    std::vector<LayerInfo> layers;
    int total_states = 0;
    int output_states = 0;
    double exponent = 0.0;  // log_k(total), reporting only

    std::string str() const;
};

// Requires compiler layer metadata on the program.
SizeReport size_report(const BranchingProgram& bp);

}  // namespace tep

#endif  // TEP_SYNTHESIS_HPP_
