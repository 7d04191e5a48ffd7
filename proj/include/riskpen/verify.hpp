#pragma once

#include "riskpen/objective.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace riskpen {

struct VerifyCheck {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct VerifyOptions {
    double gamma = 100.0;
    std::size_t random_instances = 200;
    std::size_t gradient_directions = 10;
    std::uint64_t seed = 7;
};

/// Property battery on a configured problem: PDE solver identities, cone and
/// penalty identities, risk axioms and duality, constraint adjoint identity,
/// reduced-gradient finite-difference agreement and the structural KKT
/// equations. Deterministic for a fixed seed.
std::vector<VerifyCheck> run_verification(const ProblemData& data, const VerifyOptions& opts);

} // namespace riskpen
