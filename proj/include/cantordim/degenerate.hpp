#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cantordim/moebius.hpp"
#include "cantordim/result.hpp"

namespace cantordim {

/// Weighted point masses accumulated while pushing the constant-orbit
/// point through all words of one length. Atoms are kept sorted by
/// position and pooled when their positions quantize equally at merge_tol;
/// mass pruned below prune_tol collects in dropped_mass, which is decayed
/// by (1 - p_j) per level so that retained + dropped always equals the
/// exact word-measure mass of the level.
struct OrbitMeasure {
  std::vector<std::pair<double, double>> atoms;  // (point, weight), ascending
  double dropped_mass = 0.0;

  double total_weight() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.second;
    return s;
  }
};

struct DegenerateOptions {
  double merge_tol = 1e-9;
  double prune_tol = 1e-14;
  long long max_levels = 20000;
  std::size_t max_atoms = 8'000'000;  // heaviest kept; the rest is dropped honestly
};

/// Interval containing alpha and closed under all mu-valid maps, found by
/// iterating endpoint images to a fixed point (tolerance 1e-12).
std::pair<double, double> orbit_hull(const IfsSystem& sys, double alpha);

/// One propagation step: push every atom through each mu-valid map other
/// than j, merge, prune, decay the dropped mass by (1 - p_j). pruned_out,
/// when given, accumulates the raw (undecayed) mass pruned in this step.
OrbitMeasure propagate_level(const IfsSystem& sys, int j, const OrbitMeasure& level,
                             const DegenerateOptions& opts, double* pruned_out = nullptr);

/// Word-series evaluation of lambda for a system whose map j is constant.
/// The reported bound covers the level-L tail, C (1-p_j)^{L+1}, plus
/// C * (total pruned mass).
LyapunovResult lyapunov_degenerate(const IfsSystem& sys, int j, double eps,
                                   const DegenerateOptions& opts = {});

}  // namespace cantordim
