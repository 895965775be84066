#pragma once

#include <span>
#include <string>
#include <vector>

#include "metrolab/audit.hpp"

namespace metrolab {

struct CheckResult {
    std::string name;
    bool passed = false;
    double expected = 0.0;
    double actual = 0.0;
    std::string detail;
};

struct VerifyReport {
    std::string suite;
    std::vector<CheckResult> checks;

    bool all_passed() const {
        for (const CheckResult& c : checks)
            if (!c.passed) return false;
        return !checks.empty();
    }
};

// Cross-checks the closed-form bounds against the independent numerical
// oracles: the record-level Cramer-Rao bound, the eigenvalue-gap information
// integral, and the crossover/minimum-time consistency.
VerifyReport verify_oracles();

// Regenerates the figure tables and checks their derived landmarks.
VerifyReport verify_figures();

// Recomputes the audit dataset and asserts the expected agreement set, the
// expected discrepancy flags, verbatim integrity of the printed figures and
// the verdict vocabulary.
VerifyReport verify_audit(std::span<const ExperimentEntry> entries);
VerifyReport verify_audit();  // builtin dataset

}  // namespace metrolab
