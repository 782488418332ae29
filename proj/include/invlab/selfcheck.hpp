#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "invlab/parallel.hpp"

namespace invlab {

struct CheckResult {
    std::string suite;
    bool passed = false;
    std::string detail;
};

struct SelfcheckReport {
    std::vector<CheckResult> results;

    bool passed() const;
    std::vector<std::string> failures() const;
    nlohmann::json to_json() const;
};

/// Runs every invariant suite: step round trip, closed-form expansion,
/// difference decomposition, method degeneracies, evaluation counts, EasyInv
/// step sets, metric axioms and the mixture score oracle.
SelfcheckReport selfcheck(Execution exec = Execution::parallel);

}  // namespace invlab
