#pragma once

#include <optional>
#include <vector>

#include "cantordim/moebius.hpp"
#include "cantordim/result.hpp"

namespace cantordim {

/// A Moebius phi with phi o f_i = r_i phi + s_i for every mu-valid i,
/// together with the verified (r_i, s_i) pairs.
struct CoInvariantData {
  MoebiusMap phi;
  std::vector<int> idx;  // mu-valid indices, ascending
  std::vector<double> r, s;
  double residual = 0.0;           // max conjugation defect on a 101-point grid
  double pole = 0.0;               // common fixed point used (infinity encoded as NaN)
  bool pole_at_infinity = false;
};

/// Check a candidate phi against every mu-valid map: the conjugated maps
/// must be affine (q1 = 0 up to scale) and the pointwise defect small.
std::optional<CoInvariantData> verify_affine_conjugator(const IfsSystem& sys,
                                                        const MoebiusMap& phi);

/// Intersect the fixed-point sets of all mu-valid maps; for each common
/// fixed point c outside [-1,1] build phi(x) = 0.95 (c x - 1)/(x - c)
/// (antisymmetric values at +-1, sup-norm 0.95) and return the first
/// verified candidate. When every mu-valid map is affine the candidate
/// phi(x) = 0.95 x (pole at infinity) is used. Empty means the method
/// does not apply.
std::optional<CoInvariantData> find_affine_conjugator(const IfsSystem& sys);

/// Moments xi_n = integral of phi^n against the stationary measure, from
/// the co-invariance recurrence; xi_0 = 1.
struct MomentSequence {
  std::vector<double> xs;
  double tail_bound = 0.0;  // |xi_{n_max+1}| <= sup|phi|^{n_max+1}
};

MomentSequence moments(const CoInvariantData& data, const ProductMeasure& mu, int n_max = 120);

/// lambda = sum_n a_n xi_n with a_n the measure-weighted log-norm
/// coefficients; truncated where 2 sum_{n>N} (r ||phi||)^n / n <= eps.
LyapunovResult lyapunov_recurring(const IfsSystem& sys, const CoInvariantData& data, double eps);

}  // namespace cantordim
