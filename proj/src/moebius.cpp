#include "cantordim/moebius.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cantordim/errors.hpp"

namespace cantordim {

std::optional<double> MoebiusMap::pole() const {
  double scale = std::max({std::fabs(a), std::fabs(b), std::fabs(c), std::fabs(d)});
  if (scale == 0.0 || std::fabs(c) <= 1e-300 * scale) return std::nullopt;
  return -d / c;
}

MoebiusMap MoebiusMap::normalized() const {
  double scale = std::max({std::fabs(a), std::fabs(b), std::fabs(c), std::fabs(d)});
  if (scale == 0.0) return *this;
  // Fix the sign by the first nonzero coefficient so equal maps normalize
  // to equal quadruples.
  double lead = a;
  if (lead == 0.0) lead = b;
  if (lead == 0.0) lead = c;
  if (lead == 0.0) lead = d;
  if (lead < 0.0) scale = -scale;
  return MoebiusMap{a / scale, b / scale, c / scale, d / scale};
}

bool MoebiusMap::is_identity(double tol) const {
  MoebiusMap n = normalized();
  return std::fabs(n.b) <= tol && std::fabs(n.c) <= tol && std::fabs(n.a - n.d) <= tol;
}

double MoebiusMap::sup_norm() const {
  if (auto p = pole(); p && *p >= -1.0 && *p <= 1.0)
    throw CantorError(ErrorKind::PoleInside, "sup_norm needs the pole outside [-1,1]");
  return std::max(std::fabs((*this)(-1.0)), std::fabs((*this)(1.0)));
}

InducedMap induced_map_flagged(const Mat2& A) {
  const double p = static_cast<double>(A(0, 0)), q = static_cast<double>(A(0, 1));
  const double r = static_cast<double>(A(1, 0)), s = static_cast<double>(A(1, 1));
  if (A(0, 0) < 0 || A(0, 1) < 0 || A(1, 0) < 0 || A(1, 1) < 0)
    throw std::invalid_argument("induced_map: matrix must be nonnegative");
  if (p + q + r + s == 0.0) throw std::invalid_argument("induced_map: matrix must be nonzero");

  InducedMap out;
  out.alpha = p - q - r + s;
  out.beta = p - q + r - s;
  out.gamma = p + q - r - s;
  out.delta = p + q + r + s;
  out.zero_row0 = (A.row_sum(0) == 0);
  out.zero_row1 = (A.row_sum(1) == 0);
  if (A.det() == 0) {
    out.kind = InducedMap::Kind::Constant;
    out.value = out.beta / out.delta;  // f(0)
  } else {
    out.kind = InducedMap::Kind::Moebius;
    out.map = MoebiusMap{out.alpha, out.beta, out.gamma, out.delta};
  }
  return out;
}

InducedMap induced_map(const Mat2& A) {
  InducedMap m = induced_map_flagged(A);
  if (m.zero_row0 || m.zero_row1)
    throw CantorError(ErrorKind::ZeroRowSum, "matrix has a zero row sum; image touches a simplex corner");
  return m;
}

ConjugationData conjugate(const MoebiusMap& phi, const MoebiusMap& f) {
  double scale = std::max({std::fabs(phi.a), std::fabs(phi.b), std::fabs(phi.c), std::fabs(phi.d)});
  if (scale == 0.0 || std::fabs(phi.det()) <= 1e-14 * scale * scale)
    throw CantorError(ErrorKind::SingularPhi, "phi has zero determinant");
  // Phi F adj(Phi); the adjugate differs from the inverse by det(Phi), which
  // the projective storage absorbs.
  const double m00 = phi.a * f.a + phi.b * f.c;
  const double m01 = phi.a * f.b + phi.b * f.d;
  const double m10 = phi.c * f.a + phi.d * f.c;
  const double m11 = phi.c * f.b + phi.d * f.d;
  ConjugationData out;
  out.p1 = m00 * phi.d - m01 * phi.c;
  out.p2 = -m00 * phi.b + m01 * phi.a;
  out.q1 = m10 * phi.d - m11 * phi.c;
  out.q2 = -m10 * phi.b + m11 * phi.a;
  return out;
}

std::vector<double> fixed_points(const MoebiusMap& f) {
  if (f.is_identity()) throw CantorError(ErrorKind::IdentityMap, "every point is fixed");
  // f(x) = x  <=>  c x^2 + (d - a) x - b = 0
  const double A = f.c, B = f.d - f.a, C = -f.b;
  std::vector<double> roots;
  double scale = std::max({std::fabs(f.a), std::fabs(f.b), std::fabs(f.c), std::fabs(f.d)});
  if (std::fabs(A) <= 1e-14 * scale) {
    if (std::fabs(B) > 1e-14 * scale) roots.push_back(-C / B);
    return roots;  // translation: no finite fixed point
  }
  const double disc = B * B - 4.0 * A * C;
  if (disc < 0.0) return roots;
  if (disc == 0.0) {
    roots.push_back(-B / (2.0 * A));
    return roots;
  }
  const double sq = std::sqrt(disc);
  const double qf = -0.5 * (B + (B >= 0.0 ? sq : -sq));
  double r1 = qf / A;
  double r2 = (qf != 0.0) ? C / qf : -B / A - r1;
  if (r1 > r2) std::swap(r1, r2);
  roots.push_back(r1);
  roots.push_back(r2);
  return roots;
}

std::pair<double, double> image_interval(const MoebiusMap& f, double lo, double hi) {
  if (lo > hi) std::swap(lo, hi);
  if (auto p = f.pole(); p && *p >= lo && *p <= hi)
    throw CantorError(ErrorKind::PoleInside, "pole inside the requested interval");
  double y1 = f(lo), y2 = f(hi);
  if (y1 > y2) std::swap(y1, y2);
  return {y1, y2};
}

double LogNormSeries::coeff(int n) const {
  if (n == 0) return a0;
  return (std::pow(ratio_phi, n) - std::pow(ratio_map, n)) / n;
}

double LogNormSeries::partial_sum(int n, double phi_x) const {
  double acc = a0;
  double pw_phi = 1.0, pw_map = 1.0;
  for (int k = 1; k <= n; ++k) {
    pw_phi *= ratio_phi;
    pw_map *= ratio_map;
    acc += (pw_phi - pw_map) / k * std::pow(phi_x, k);
  }
  return acc;
}

LogNormSeries log_norm_coefficients(const InducedMap& f, const MoebiusMap& phi) {
  if (f.zero_row0 || f.zero_row1)
    throw CantorError(ErrorKind::ZeroRowSum, "integrand unbounded: a row of the matrix sums to zero");
  const double A = phi.a, B = phi.b, C = phi.c, D = phi.d;
  const double g = f.gamma, d = f.delta;
  if (A == 0.0)
    throw CantorError(ErrorKind::RatioNotContractive, "phi numerator leading coefficient is zero");
  LogNormSeries out;
  const double denom = A * d - B * g;
  const double arg = denom / (2.0 * A);
  if (!(arg > 0.0))
    throw CantorError(ErrorKind::RatioNotContractive,
                      "log argument (A delta - B gamma)/(2A) is not positive");
  out.a0 = std::log(arg);
  out.ratio_phi = C / A;
  out.ratio_map = (C * d - D * g) / denom;
  if (!(std::fabs(out.ratio_phi) < 1.0))
    throw CantorError(ErrorKind::RatioNotContractive, "|C/A| >= 1");
  if (!(std::fabs(out.ratio_map) < 1.0))
    throw CantorError(ErrorKind::RatioNotContractive,
                      "|(C delta - D gamma)/(A delta - B gamma)| >= 1");
  return out;
}

LogNormSeries log_norm_coefficients(const Mat2& A, const MoebiusMap& phi) {
  return log_norm_coefficients(induced_map_flagged(A), phi);
}

double log_norm_integrand(const InducedMap& f, double x) {
  // || ((1+x)/2, (1-x)/2) A ||_1 = (delta + gamma x)/2 for nonnegative A.
  return std::log(0.5 * (f.delta + f.gamma * x));
}

double log_norm_integrand(const Mat2& A, double x) {
  return log_norm_integrand(induced_map_flagged(A), x);
}

IfsSystem make_system(TransferMatrices tm, ProductMeasure measure) {
  measure.validate();
  if (measure.size() != tm.b) throw std::invalid_argument("measure size must match base");
  IfsSystem sys;
  sys.b = tm.b;
  sys.mats = std::move(tm);
  sys.measure = std::move(measure);
  sys.maps.reserve(static_cast<std::size_t>(sys.b));
  for (const Mat2& m : sys.mats.mats) sys.maps.push_back(induced_map_flagged(m));
  sys.valid = mu_valid_indices(sys.measure);
  return sys;
}

IfsSystem make_system(const DigitPair& pair, ProductMeasure measure) {
  return make_system(build_matrices(pair), std::move(measure));
}

}  // namespace cantordim
