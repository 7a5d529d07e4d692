#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cantordim/moebius.hpp"

namespace cantordim {

struct McEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};

/// Furstenberg-Kesten sampling: per trial, draw i.i.d. digits, push a
/// normalized positive row vector through the matrices and average the log
/// normalization factors. Trials run independently (derived seeds) and are
/// aggregated in a fixed order, so equal seeds reproduce bit-identically.
McEstimate mc_lyapunov(const TransferMatrices& tm, const ProductMeasure& mu, long long steps,
                       int trials, std::uint64_t seed);

/// Histogram on [-1,1] with `cells` equal cells.
struct GridMeasure {
  std::vector<double> mass;

  int cells() const { return static_cast<int>(mass.size()); }
  double cell_mid(int c) const { return -1.0 + 2.0 * (c + 0.5) / cells(); }
  double total() const;
  /// Midpoint-rule integral of f against the measure.
  double integrate(const std::function<double(double)>& f) const;
};

/// Pushforward iteration nu -> sum_i p_i (f_i)_* nu on a uniform-cell
/// histogram, mass redistributed by image-interval overlap.
GridMeasure grid_stationary(const IfsSystem& sys, int cells, int iters);

/// dim = lambda / log b.
double dim_from_lambda(double lambda, int b);

/// Syntactic check of the stationary-measure uniqueness conditions: some
/// mu-valid matrix is rank-one, or some mu-valid matrix is primitive (for
/// 2x2 nonnegative matrices, primitive iff the square is entrywise
/// positive). When this fails the sampled estimate may converge slowly and
/// its target may be non-unique.
bool uniqueness_conditions_hold(const TransferMatrices& tm, const ProductMeasure& mu);

}  // namespace cantordim
