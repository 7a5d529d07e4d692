#pragma once

#include <string>
#include <vector>

#include "cantordim/moebius.hpp"
#include "cantordim/result.hpp"

namespace cantordim {

/// Conjugation constants and the admissibility verdict for a candidate phi.
/// passed requires every strict inequality to hold with margin (1e-9 plus a
/// forward-error allowance); borderline values are flagged inconclusive
/// instead of passed.
struct NacReport {
  struct PerIndex {
    int i = 0;
    double u1 = 0, u2 = 0, u3 = 0, m = 0;
    double ratio_map = 0;  // (C delta - D gamma)/(A delta - B gamma)
    ConjugationData conj;
  };
  std::vector<PerIndex> per;
  double rho1 = 0, rho2 = 0, rho3 = 0, rho4 = 0;
  double ratio_phi = 0;      // |C/A|
  double max_ratio_map = 0;  // max_i |ratio_map(i)|
  double r = 0;              // max{ratios, |C/A|, rho4}
  double E = 0;              // max{1/(1 - r rho1), rho3}
  double norm_bound = 0;     // max{rho1/(1 - rho1), rho3}
  bool passed = false;
  bool inconclusive = false;
  double margin = 0;  // min slack over the strict inequalities
  std::string reason;
};

NacReport nac_report(const IfsSystem& sys, const MoebiusMap& phi);

/// N x N truncation of the change-of-basis operator T between phi-power
/// and kernel expansions. Column 0 is identically zero.
struct TruncatedOperator {
  int n = 0;
  std::vector<double> entries;  // row-major, entries[k * n + col]

  double at(int k, int col) const { return entries[static_cast<std::size_t>(k) * n + col]; }
  /// y = T_N x for x of length n.
  std::vector<double> apply(const std::vector<double>& x) const;
};

TruncatedOperator build_T(const IfsSystem& sys, const MoebiusMap& phi, int N);

/// a_0 = sum_i p_i log((A d_i - B g_i)/(2A)),
/// a_n = (1/n) [(C/A)^n - sum_i p_i ratio_i^n]; length N.
std::vector<double> a_vector(const IfsSystem& sys, const MoebiusMap& phi, int N);

/// Outer length M and operator size N certifying total error below eps:
/// norm_bound^{M+1}/(1 - norm_bound) < eps/2 and
/// M(M+1)/2 * E r^{N-1} < eps/2. Computed in log space, so eps down to
/// 1e-50 and beyond is fine.
struct TruncationPlan {
  double eps = 0;
  long long M = 0, N = 0;
  double r = 0, E = 0, R_N = 0;
  double norm_bound = 0;
};

TruncationPlan truncation_plan(const NacReport& report, double eps);

/// lambda = sum_{n=0}^{M} (T_N^n a)_0 with (M, N) from the plan.
LyapunovResult lyapunov_neumann(const IfsSystem& sys, const MoebiusMap& phi, double eps);

}  // namespace cantordim
