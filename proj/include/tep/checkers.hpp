#ifndef TEP_CHECKERS_HPP_
#define TEP_CHECKERS_HPP_

#include <string>

#include <json.hpp>

#include "tep/branching_program.hpp"

namespace tep {

/// Pass/fail with a machine-readable witness on fail. A fail witness must
/// re-check as a genuine violation (see revalidate_witness). Verdicts from
/// sampled runs are marked; a sampled pass is advisory, a sampled fail is
/// definitive.
struct Verdict {
    std::string property;
    bool pass = true;
    bool sampled = false;
    std::string detail;
    nlohmann::json witness;

    nlohmann::json to_json() const;
};

// pass iff for every instance: at least one complete path exists and every
// complete path ends at the output labelled v_1.
Verdict computes_tep(const BranchingProgram& bp, const Budget& budget = Budget{});

// pass iff every complete computation path of every instance queries only
// thrifty function slots.
Verdict check_thrifty(const BranchingProgram& bp, const Budget& budget = Budget{});

// pass iff no directed source-to-sink path visits two states with the same
// QueryId; decided per QueryId via pairwise reachability.
Verdict check_syntactic_read_once(const BranchingProgram& bp);

// pass iff no complete graph path assigns two labels to one QueryId.
Verdict check_null_path_free(const BranchingProgram& bp, const Budget& budget = Budget{});

// pass iff every complete computation path of every instance is read-once.
Verdict check_semantic_read_once(const BranchingProgram& bp, const Budget& budget = Budget{});

// Re-executes a fail witness against the program; true iff the violation
// reproduces exactly as recorded.
bool revalidate_witness(const BranchingProgram& bp, const Verdict& verdict,
                        const Budget& budget = Budget{});

}  // namespace tep

#endif  // TEP_CHECKERS_HPP_
