#pragma once

#include <string>
#include <vector>

namespace consensus {

struct VerificationCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Runs the built-in property checks (exigent-eigenvalue selection for both
/// protocols, crossing monotonicity, the phase-inequality and resultant
/// identities, switching continuity for the self-delay protocol, and
/// oracle agreement of the margin formulas). Deterministic; finishes in a
/// few seconds.
std::vector<VerificationCheck> run_verification();

}  // namespace consensus
