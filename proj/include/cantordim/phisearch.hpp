#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "cantordim/neumann.hpp"

namespace cantordim {

/// Derivative-free feasibility search for a Moebius phi satisfying the
/// admissibility condition. Coefficients are normalized to D = 1; the
/// penalty is max(2 rho1, rho2, rho3, rho4, |C/A|, max ratio), so any value
/// below 1 is feasible. Multi-start Nelder-Mead descent from a deterministic
/// seeded grid; the first candidate whose report passes (in start order)
/// wins. Empty after `budget` evaluations; that is not a proof that no
/// admissible phi exists.
std::optional<std::pair<MoebiusMap, NacReport>> search_phi(const IfsSystem& sys, int budget,
                                                           std::uint64_t seed);

}  // namespace cantordim
