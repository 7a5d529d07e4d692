#pragma once

#include <optional>
#include <vector>

#include "cantordim/digitsets.hpp"
#include "cantordim/measures.hpp"

namespace cantordim {

/// x -> (a x + b)/(c x + d), stored up to nonzero scaling. Every quantity
/// derived from one here is invariant under rescaling all four coefficients.
struct MoebiusMap {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  double operator()(double x) const { return (a * x + b) / (c * x + d); }

  /// Finite pole -d/c, or empty for affine maps (c == 0).
  std::optional<double> pole() const;

  MoebiusMap inverse() const { return MoebiusMap{d, -b, -c, a}; }
  MoebiusMap normalized() const;
  bool is_identity(double tol = 1e-12) const;
  double det() const { return a * d - b * c; }
  /// sup |f| over [-1,1]; requires the pole outside the closed interval.
  double sup_norm() const;
};

/// Entries of Phi F Phi^{-1} (any consistent scaling): the coefficients of
/// phi o f o phi^{-1} as a map of the phi-variable.
struct ConjugationData {
  double p1 = 0, p2 = 0, q1 = 0, q2 = 0;
};

/// Map induced on [-1,1] by a nonnegative matrix. Rank-one matrices give an
/// explicit constant, not a near-singular Moebius map. The canonical
/// coefficient quadruple (alpha, beta, gamma, delta) of the inducing matrix
/// is kept unscaled: the log-norm integrand depends on delta itself.
struct InducedMap {
  enum class Kind { Moebius, Constant };
  Kind kind = Kind::Moebius;
  MoebiusMap map;       // valid when kind == Moebius
  double value = 0.0;   // valid when kind == Constant
  double alpha = 0, beta = 0, gamma = 0, delta = 0;
  bool zero_row0 = false, zero_row1 = false;

  bool constant() const { return kind == Kind::Constant; }
  double apply(double x) const { return constant() ? value : map(x); }
};

/// Does not reject rank-one matrices (those yield the constant marker), but
/// throws ZeroRowSum when a row of A sums to zero: the image then touches a
/// simplex corner and downstream logarithms diverge there.
InducedMap induced_map(const Mat2& A);

/// Variant used during system assembly: zero row sums are flagged on the
/// result instead of thrown.
InducedMap induced_map_flagged(const Mat2& A);

ConjugationData conjugate(const MoebiusMap& phi, const MoebiusMap& f);

/// Real solutions of f(x) = x. Throws IdentityMap for the identity.
std::vector<double> fixed_points(const MoebiusMap& f);

/// Exact image of [lo, hi]; f is monotone on pole-free intervals, so the
/// endpoints map to endpoints. Throws PoleInside.
std::pair<double, double> image_interval(const MoebiusMap& f, double lo, double hi);

/// Coefficients of log || ((1+x)/2, (1-x)/2) A ||_1 as a power series in
/// phi(x): a_0 = log((A d - B g)/(2 A)) and
/// a_n = (1/n) [ (C/A)^n - ((C d - D g)/(A d - B g))^n ] with (g, d) the
/// canonical denominator coefficients of the induced map.
struct LogNormSeries {
  double a0 = 0.0;
  double ratio_phi = 0.0;  // C/A
  double ratio_map = 0.0;  // (C delta - D gamma)/(A delta - B gamma)

  double coeff(int n) const;
  /// a0 + sum_{k=1..n} a_k phi_x^k
  double partial_sum(int n, double phi_x) const;
};

LogNormSeries log_norm_coefficients(const Mat2& A, const MoebiusMap& phi);
LogNormSeries log_norm_coefficients(const InducedMap& f, const MoebiusMap& phi);

/// Direct evaluation of the integrand log || ((1+x)/2, (1-x)/2) A ||_1.
double log_norm_integrand(const Mat2& A, double x);
double log_norm_integrand(const InducedMap& f, double x);

/// A digit system realized on [-1,1]: matrices, induced maps with their
/// canonical coefficients, and the driving product measure.
struct IfsSystem {
  int b = 0;
  TransferMatrices mats;
  std::vector<InducedMap> maps;
  ProductMeasure measure;
  std::vector<int> valid;  // cached mu-valid indices

  double prob(int i) const { return measure.p[static_cast<std::size_t>(i)]; }
};

IfsSystem make_system(const DigitPair& pair, ProductMeasure measure);
IfsSystem make_system(TransferMatrices tm, ProductMeasure measure);

}  // namespace cantordim
