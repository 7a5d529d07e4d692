#include "cantordim/recurring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cantordim/errors.hpp"

namespace cantordim {

namespace {

constexpr double kVerifyTol = 1e-10;

double conj_scale(const ConjugationData& c) {
  return std::max({std::fabs(c.p1), std::fabs(c.p2), std::fabs(c.q1), std::fabs(c.q2)});
}

}  // namespace

std::optional<CoInvariantData> verify_affine_conjugator(const IfsSystem& sys,
                                                        const MoebiusMap& phi) {
  if (auto p = phi.pole(); p && *p >= -1.0 && *p <= 1.0) return std::nullopt;

  CoInvariantData data;
  data.phi = phi;
  if (auto p = phi.pole()) {
    data.pole = *p;
  } else {
    data.pole = std::numeric_limits<double>::quiet_NaN();
    data.pole_at_infinity = true;
  }
  for (int i : sys.valid) {
    const InducedMap& f = sys.maps[static_cast<std::size_t>(i)];
    if (f.constant()) return std::nullopt;
    ConjugationData c = conjugate(phi, f.map);
    const double scale = conj_scale(c);
    if (scale == 0.0 || std::fabs(c.q2) <= 1e-12 * scale) return std::nullopt;
    if (std::fabs(c.q1) > 1e-9 * scale) return std::nullopt;
    data.idx.push_back(i);
    data.r.push_back(c.p1 / c.q2);
    data.s.push_back(c.p2 / c.q2);
  }

  // Pointwise defect of phi(f_i(x)) - (r_i phi(x) + s_i) on a 101-point grid.
  double residual = 0.0;
  for (std::size_t k = 0; k < data.idx.size(); ++k) {
    const InducedMap& f = sys.maps[static_cast<std::size_t>(data.idx[k])];
    for (int g = 0; g <= 100; ++g) {
      const double x = -1.0 + 2.0 * g / 100.0;
      const double lhs = phi(f.map(x));
      const double rhs = data.r[k] * phi(x) + data.s[k];
      residual = std::max(residual, std::fabs(lhs - rhs));
    }
  }
  if (residual > kVerifyTol) return std::nullopt;
  data.residual = residual;
  return data;
}

std::optional<CoInvariantData> find_affine_conjugator(const IfsSystem& sys) {
  if (sys.valid.empty()) return std::nullopt;
  for (int i : sys.valid)
    if (sys.maps[static_cast<std::size_t>(i)].constant()) return std::nullopt;

  // Pole at infinity: applicable when every mu-valid map is affine.
  bool all_affine = true;
  for (int i : sys.valid) {
    const MoebiusMap& m = sys.maps[static_cast<std::size_t>(i)].map;
    const double scale = std::max({std::fabs(m.a), std::fabs(m.b), std::fabs(m.c), std::fabs(m.d)});
    if (std::fabs(m.c) > 1e-12 * scale) {
      all_affine = false;
      break;
    }
  }
  if (all_affine) {
    return verify_affine_conjugator(sys, MoebiusMap{0.95, 0.0, 0.0, 1.0});
  }

  // Candidate poles: fixed points of the first non-identity map, kept when
  // fixed by all other mu-valid maps and lying outside [-1,1].
  std::vector<double> candidates;
  for (int i : sys.valid) {
    const MoebiusMap& m = sys.maps[static_cast<std::size_t>(i)].map;
    if (m.is_identity()) continue;
    candidates = fixed_points(m);
    break;
  }
  std::vector<double> common;
  for (double c : candidates) {
    bool ok = true;
    for (int i : sys.valid) {
      const MoebiusMap& m = sys.maps[static_cast<std::size_t>(i)].map;
      if (m.is_identity()) continue;
      const double den = m.c * c + m.d;
      if (std::fabs(den) <= 1e-14 * (std::fabs(m.c * c) + std::fabs(m.d) + 1.0)) {
        ok = false;  // c is the pole of f_i, not a fixed point
        break;
      }
      if (std::fabs(m(c) - c) > 1e-9 * (1.0 + std::fabs(c))) {
        ok = false;
        break;
      }
    }
    if (ok && std::fabs(c) > 1.0 + 1e-9) common.push_back(c);
  }

  for (double c : common) {
    // phi(x) = 0.95 (c x - 1)/(x - c): pole at c, phi(-1) = -phi(1),
    // sup norm exactly 0.95.
    MoebiusMap phi{0.95 * c, -0.95, 1.0, -c};
    if (auto data = verify_affine_conjugator(sys, phi)) return data;
  }
  return std::nullopt;
}

MomentSequence moments(const CoInvariantData& data, const ProductMeasure& mu, int n_max) {
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  const std::size_t m = data.idx.size();
  std::vector<double> p(m);
  for (std::size_t k = 0; k < m; ++k) p[k] = mu.p[static_cast<std::size_t>(data.idx[k])];

  MomentSequence out;
  out.xs.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  out.xs[0] = 1.0;

  // Running powers r_i^n and the binomial row, updated in place.
  std::vector<double> rpow(m, 1.0);
  for (int n = 1; n <= n_max; ++n) {
    for (std::size_t k = 0; k < m; ++k) rpow[k] *= data.r[k];
    double denom = 1.0;
    for (std::size_t k = 0; k < m; ++k) denom -= p[k] * rpow[k];
    if (std::fabs(denom) < 1e-12)
      throw CantorError(ErrorKind::ResonantDenominator,
                        "1 - sum p_i r_i^n vanishes at n = " + std::to_string(n));
    double acc = 0.0;
    double binom = 1.0;  // C(n, k), k ascending
    std::vector<double> rk(m, 1.0);
    for (int k = 0; k < n; ++k) {
      if (k > 0) {
        binom *= static_cast<double>(n - k + 1) / static_cast<double>(k);
        for (std::size_t t = 0; t < m; ++t) rk[t] *= data.r[t];
      }
      double w = 0.0;
      for (std::size_t t = 0; t < m; ++t)
        w += p[t] * rk[t] * std::pow(data.s[t], n - k);
      acc += binom * w * out.xs[static_cast<std::size_t>(k)];
    }
    out.xs[static_cast<std::size_t>(n)] = acc / denom;
  }
  const double sup = data.phi.sup_norm();
  out.tail_bound = std::pow(sup, n_max + 1);
  return out;
}

LyapunovResult lyapunov_recurring(const IfsSystem& sys, const CoInvariantData& data, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("eps must be positive");

  std::vector<LogNormSeries> series;
  series.reserve(data.idx.size());
  double ratio = 0.0;
  for (int i : data.idx) {
    series.push_back(log_norm_coefficients(sys.maps[static_cast<std::size_t>(i)], data.phi));
    ratio = std::max({ratio, std::fabs(series.back().ratio_phi), std::fabs(series.back().ratio_map)});
  }
  const double sup = data.phi.sup_norm();
  const double z = ratio * sup;
  if (!(z < 1.0))
    throw CantorError(ErrorKind::RatioNotContractive, "r * sup|phi| >= 1: series diverges");

  // Smallest N with 2 sum_{n>N} z^n / n <= 2 z^{N+1} / ((N+1)(1-z)) <= eps.
  int N = 1;
  double zp = z * z;
  while (2.0 * zp / ((N + 1) * (1.0 - z)) > eps && N < 100000) {
    zp *= z;
    ++N;
  }
  const double tail = 2.0 * zp / ((N + 1) * (1.0 - z));

  MomentSequence xi = moments(data, sys.measure, N);

  double lambda = 0.0;
  for (int n = 0; n <= N; ++n) {
    double an = 0.0;
    for (std::size_t k = 0; k < data.idx.size(); ++k)
      an += sys.measure.p[static_cast<std::size_t>(data.idx[k])] * series[k].coeff(n);
    lambda += an * xi.xs[static_cast<std::size_t>(n)];
  }

  LyapunovResult res;
  res.lambda = lambda;
  res.dimension = lambda / std::log(static_cast<double>(sys.b));
  res.method = Method::Recurring;
  res.error_bound = tail;
  res.metadata = {
      {"phi", {data.phi.a, data.phi.b, data.phi.c, data.phi.d}},
      {"terms", N},
      {"conjugation_residual", data.residual},
      {"phi_sup", sup},
      {"max_ratio", ratio},
  };
  if (data.pole_at_infinity)
    res.metadata["common_fixed_point"] = "infinity";
  else
    res.metadata["common_fixed_point"] = data.pole;
  return res;
}

}  // namespace cantordim
