#include "cantordim/neumann.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cantordim/errors.hpp"
#include "cantordim/parallel.hpp"

namespace cantordim {

namespace {

// Conservative slack for the strict NAC inequalities: a fixed 1e-9 margin
// plus an allowance scaled to the operand magnitudes, dominating the forward
// error of the handful of operations producing each constant.
double required_margin(double value, double threshold) {
  return 1e-9 + 64.0 * std::numeric_limits<double>::epsilon() *
                    (1.0 + std::fabs(value) + std::fabs(threshold));
}

struct Inequality {
  const char* name;
  double value;
  double threshold;
};

}  // namespace

NacReport nac_report(const IfsSystem& sys, const MoebiusMap& phi) {
  const double phi_scale =
      std::max({std::fabs(phi.a), std::fabs(phi.b), std::fabs(phi.c), std::fabs(phi.d)});
  if (phi_scale == 0.0 || std::fabs(phi.det()) <= 1e-14 * phi_scale * phi_scale)
    throw CantorError(ErrorKind::SingularPhi, "phi has zero determinant");

  NacReport rep;

  // Pre: phi maps [-1,1] into (-1,1). Violations fail the verdict (the
  // constants below are still reported) rather than throw, so search and
  // the CLI can probe candidates freely.
  bool image_ok = true;
  if (auto p = phi.pole(); p && *p >= -1.0 && *p <= 1.0) {
    rep.reason = "phi has a pole inside [-1,1]";
    return rep;
  }
  if (std::fabs(phi(-1.0)) >= 1.0 || std::fabs(phi(1.0)) >= 1.0) {
    rep.reason = "phi does not map [-1,1] into (-1,1)";
    image_ok = false;
  }
  if (phi.a == 0.0) {
    rep.reason = "phi numerator leading coefficient is zero";
    return rep;
  }

  rep.ratio_phi = std::fabs(phi.c / phi.a);
  rep.rho1 = rep.rho2 = rep.rho3 = rep.rho4 = 0.0;
  rep.max_ratio_map = 0.0;

  for (int i : sys.valid) {
    const InducedMap& f = sys.maps[static_cast<std::size_t>(i)];
    if (f.constant())
      throw CantorError(ErrorKind::DegenerateMap,
                        "mu-valid map " + std::to_string(i) +
                            " is constant; use the degenerate method");
    NacReport::PerIndex pi;
    pi.i = i;
    pi.conj = conjugate(phi, f.map);
    const ConjugationData& c = pi.conj;
    const double scale = std::max({std::fabs(c.p1), std::fabs(c.p2), std::fabs(c.q1), std::fabs(c.q2)});
    if (scale == 0.0 || std::fabs(c.q2) <= 1e-300 * scale) {
      rep.reason = "conjugated map " + std::to_string(i) + " has vanishing q2";
      return rep;
    }
    pi.u1 = std::fabs(c.p2 / c.q2);
    if (std::fabs(c.q1) < 1e-14 * scale) {
      // Affine limit: u3 -> 0 and u2 -> |s_i - r_i| of the affine map.
      pi.u3 = 0.0;
      pi.u2 = std::fabs(c.p2 / c.q2 - c.p1 / c.q2);
    } else {
      pi.u3 = std::fabs(c.q1 / c.q2);
      pi.u2 = std::fabs(c.p2 / c.q2 - c.p1 / c.q1);
    }
    pi.m = std::max(pi.u1, pi.u2);

    const double denom = phi.a * f.delta - phi.b * f.gamma;
    pi.ratio_map = (denom == 0.0) ? std::numeric_limits<double>::infinity()
                                  : (phi.c * f.delta - phi.d * f.gamma) / denom;

    rep.rho1 = std::max(rep.rho1, pi.u1);
    rep.rho2 = std::max(rep.rho2, pi.m);
    if (pi.m < 1.0) {
      rep.rho3 = std::max(rep.rho3, pi.m * pi.u3 / ((1.0 - pi.m) * (1.0 - pi.m)));
      rep.rho4 = std::max(rep.rho4, pi.u3 / (1.0 - pi.m));
    } else {
      rep.rho3 = std::numeric_limits<double>::infinity();
      rep.rho4 = std::numeric_limits<double>::infinity();
    }
    rep.max_ratio_map = std::max(rep.max_ratio_map, std::fabs(pi.ratio_map));
    rep.per.push_back(pi);
  }

  rep.r = std::max({rep.max_ratio_map, rep.ratio_phi, rep.rho4});
  if (rep.rho1 < 1.0) rep.norm_bound = std::max(rep.rho1 / (1.0 - rep.rho1), rep.rho3);
  else rep.norm_bound = std::numeric_limits<double>::infinity();
  if (rep.r * rep.rho1 < 1.0) rep.E = std::max(1.0 / (1.0 - rep.r * rep.rho1), rep.rho3);
  else rep.E = std::numeric_limits<double>::infinity();

  const Inequality checks[] = {
      {"rho1 < 1/2", rep.rho1, 0.5},
      {"rho2 < 1", rep.rho2, 1.0},
      {"rho3 < 1", rep.rho3, 1.0},
      {"rho4 < 1", rep.rho4, 1.0},
      {"|C/A| < 1", rep.ratio_phi, 1.0},
      {"max ratio < 1", rep.max_ratio_map, 1.0},
  };
  rep.margin = std::numeric_limits<double>::infinity();
  bool all_hold = true, all_with_margin = true;
  for (const auto& q : checks) {
    const double slack = q.threshold - q.value;
    if (slack < rep.margin) {
      rep.margin = slack;
      if (image_ok) rep.reason = q.name;
    }
    if (!(q.value < q.threshold)) all_hold = false;
    if (!(slack > required_margin(q.value, q.threshold))) all_with_margin = false;
  }
  rep.passed = image_ok && all_hold && all_with_margin;
  rep.inconclusive = image_ok && all_hold && !all_with_margin;
  if (rep.passed) rep.reason.clear();
  return rep;
}

std::vector<double> TruncatedOperator::apply(const std::vector<double>& x) const {
  std::vector<double> y(static_cast<std::size_t>(n), 0.0);
  parallel_for(0, n, [&](long long k) {
    const double* row = entries.data() + static_cast<std::size_t>(k) * n;
    double acc = 0.0;
    for (int col = 0; col < n; ++col) acc += row[col] * x[static_cast<std::size_t>(col)];
    y[static_cast<std::size_t>(k)] = acc;
  });
  return y;
}

namespace {

struct IndexParams {
  double p;          // measure weight
  double t, w, v;    // p2/q2, -q1/q2, det/q2^2
  double lt, lw, lv; // logs of absolute values (-inf when zero)
  int st, sw, sv;    // signs
};

int sign_of(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

// b^{(i)}_{k,n} = sum_{l=1}^{min(k,n)} C(n,l) C(k-1,l-1) v^l t^{n-l} w^{k-l}.
// Direct product evaluation; binomials stay below overflow for k+n <= 500.
double entry_direct(const IndexParams& ip, int k, int n,
                    const std::vector<double>& pt, const std::vector<double>& pw,
                    const std::vector<double>& pv) {
  const int lmax = std::min(k, n);
  if (ip.t == 0.0 && ip.w == 0.0)
    return (k == n) ? pv[static_cast<std::size_t>(n)] : 0.0;
  if (ip.t == 0.0) {
    if (n > k) return 0.0;
    double coef = 1.0;  // C(k-1, n-1)
    for (int j = 1; j < n; ++j) coef *= static_cast<double>(k - j) / j;
    return coef * pv[static_cast<std::size_t>(n)] * pw[static_cast<std::size_t>(k - n)];
  }
  if (ip.w == 0.0) {
    if (k > n) return 0.0;
    double coef = 1.0;  // C(n, k)
    for (int j = 1; j <= k; ++j) coef *= static_cast<double>(n - k + j) / j;
    return coef * pv[static_cast<std::size_t>(k)] * pt[static_cast<std::size_t>(n - k)];
  }
  long double acc = 0.0L;
  double coef = static_cast<double>(n);  // C(n,1) C(k-1,0)
  for (int l = 1; l <= lmax; ++l) {
    if (l > 1) coef *= static_cast<double>(n - l + 1) / l * static_cast<double>(k - l + 1) / (l - 1);
    const double term = coef * pv[static_cast<std::size_t>(l)] *
                        pt[static_cast<std::size_t>(n - l)] * pw[static_cast<std::size_t>(k - l)];
    acc += static_cast<long double>(term);
  }
  return static_cast<double>(acc);
}

// Same sum evaluated in log space. The log-term profile is concave in l
// (log-binomials plus linear terms), so the peak is found by integer
// ternary search and only the window within 46 nats of it is
// exponentiated, with sign tracking.
double entry_log(const IndexParams& ip, int k, int n, const std::vector<double>& lnfact) {
  const int lmax = std::min(k, n);
  auto lnC = [&lnfact](int a, int b) {
    return lnfact[static_cast<std::size_t>(a)] - lnfact[static_cast<std::size_t>(b)] -
           lnfact[static_cast<std::size_t>(a - b)];
  };
  if (ip.t == 0.0 && ip.w == 0.0) {
    if (k != n) return 0.0;
    const int s = (n % 2 == 0) ? 1 : ip.sv;
    return s * std::exp(n * ip.lv);
  }
  if (ip.t == 0.0) {
    if (n > k) return 0.0;
    const double lg = lnC(k - 1, n - 1) + n * ip.lv + (k - n) * ip.lw;
    int s = ((n % 2) ? ip.sv : 1) * (((k - n) % 2) ? ip.sw : 1);
    return s * std::exp(lg);
  }
  if (ip.w == 0.0) {
    if (k > n) return 0.0;
    const double lg = lnC(n, k) + k * ip.lv + (n - k) * ip.lt;
    int s = ((k % 2) ? ip.sv : 1) * (((n - k) % 2) ? ip.st : 1);
    return s * std::exp(lg);
  }

  auto lnterm = [&](int l) {
    return lnC(n, l) + lnC(k - 1, l - 1) + l * ip.lv + (n - l) * ip.lt + (k - l) * ip.lw;
  };
  int lo = 1, hi = lmax;
  while (hi - lo > 2) {
    const int m1 = lo + (hi - lo) / 3;
    const int m2 = hi - (hi - lo) / 3;
    if (lnterm(m1) < lnterm(m2)) lo = m1 + 1;
    else hi = m2;
  }
  int peak = lo;
  double lnmax = lnterm(lo);
  for (int l = lo + 1; l <= hi; ++l) {
    const double v = lnterm(l);
    if (v > lnmax) {
      lnmax = v;
      peak = l;
    }
  }
  if (lnmax < -745.0) return 0.0;

  const int s_base = ((n % 2) ? ip.st : 1) * ((k % 2) ? ip.sw : 1);
  const int flip = ip.sv * ip.st * ip.sw;  // sign factor per unit of l
  long double acc = 0.0L;
  auto add = [&](int l, double lg) {
    const int s = (flip == 1 || l % 2 == 0) ? 1 : -1;
    acc += static_cast<long double>(s * std::exp(lg - lnmax));
  };
  add(peak, lnmax);
  for (int l = peak - 1; l >= 1; --l) {
    const double lg = lnterm(l);
    if (lg < lnmax - 46.0) break;  // concave: monotone decreasing away from the peak
    add(l, lg);
  }
  for (int l = peak + 1; l <= lmax; ++l) {
    const double lg = lnterm(l);
    if (lg < lnmax - 46.0) break;
    add(l, lg);
  }
  return static_cast<double>(static_cast<long double>(s_base) * acc *
                             static_cast<long double>(std::exp(lnmax)));
}

}  // namespace

TruncatedOperator build_T(const IfsSystem& sys, const MoebiusMap& phi, int N) {
  if (N < 1) throw std::invalid_argument("build_T: N must be >= 1");

  std::vector<IndexParams> params;
  for (int i : sys.valid) {
    const InducedMap& f = sys.maps[static_cast<std::size_t>(i)];
    if (f.constant())
      throw CantorError(ErrorKind::DegenerateMap, "constant mu-valid map in build_T");
    const ConjugationData c = conjugate(phi, f.map);
    IndexParams ip;
    ip.p = sys.prob(i);
    ip.t = c.p2 / c.q2;
    ip.w = -c.q1 / c.q2;
    ip.v = (c.p1 * c.q2 - c.p2 * c.q1) / (c.q2 * c.q2);
    ip.lt = std::log(std::fabs(ip.t));
    ip.lw = std::log(std::fabs(ip.w));
    ip.lv = std::log(std::fabs(ip.v));
    ip.st = sign_of(ip.t);
    ip.sw = sign_of(ip.w);
    ip.sv = sign_of(ip.v);
    // Repeated matrices give identical conjugations; pool their weights.
    bool merged = false;
    for (IndexParams& prev : params)
      if (prev.t == ip.t && prev.w == ip.w && prev.v == ip.v) {
        prev.p += ip.p;
        merged = true;
        break;
      }
    if (!merged) params.push_back(ip);
  }

  // Shared power tables (direct mode) and log-factorials (log mode).
  std::vector<std::vector<double>> pt(params.size()), pw(params.size()), pv(params.size());
  for (std::size_t s = 0; s < params.size(); ++s) {
    pt[s].assign(static_cast<std::size_t>(N) + 1, 1.0);
    pw[s].assign(static_cast<std::size_t>(N) + 1, 1.0);
    pv[s].assign(static_cast<std::size_t>(N) + 1, 1.0);
    for (int j = 1; j <= N; ++j) {
      pt[s][static_cast<std::size_t>(j)] = pt[s][static_cast<std::size_t>(j - 1)] * params[s].t;
      pw[s][static_cast<std::size_t>(j)] = pw[s][static_cast<std::size_t>(j - 1)] * params[s].w;
      pv[s][static_cast<std::size_t>(j)] = pv[s][static_cast<std::size_t>(j - 1)] * params[s].v;
    }
  }
  std::vector<double> lnfact(static_cast<std::size_t>(2 * N + 2), 0.0);
  for (std::size_t j = 2; j < lnfact.size(); ++j)
    lnfact[j] = lnfact[j - 1] + std::log(static_cast<double>(j));

  TruncatedOperator T;
  T.n = N;
  T.entries.assign(static_cast<std::size_t>(N) * N, 0.0);

  // Row 0: b_{0,n} = sum_i p_i t_i^n; column 0 stays zero everywhere.
  for (int n = 1; n < N; ++n) {
    double acc = 0.0;
    for (std::size_t s = 0; s < params.size(); ++s)
      acc += params[s].p * pt[s][static_cast<std::size_t>(n)];
    T.entries[static_cast<std::size_t>(n)] = acc;
  }

  parallel_for(1, N, [&](long long k) {
    double* row = T.entries.data() + static_cast<std::size_t>(k) * N;
    for (int n = 1; n < N; ++n) {
      double acc = 0.0;
      for (std::size_t s = 0; s < params.size(); ++s) {
        const double e = (static_cast<int>(k) + n <= 500)
                             ? entry_direct(params[s], static_cast<int>(k), n, pt[s], pw[s], pv[s])
                             : entry_log(params[s], static_cast<int>(k), n, lnfact);
        acc += params[s].p * e;
      }
      row[n] = acc;
    }
  });
  return T;
}

std::vector<double> a_vector(const IfsSystem& sys, const MoebiusMap& phi, int N) {
  if (N < 1) throw std::invalid_argument("a_vector: N must be >= 1");
  if (phi.a == 0.0)
    throw CantorError(ErrorKind::RatioNotContractive, "phi numerator leading coefficient is zero");

  std::vector<double> a(static_cast<std::size_t>(N), 0.0);
  const double cu = phi.c / phi.a;
  std::vector<double> ratios, probs;
  for (int i : sys.valid) {
    const InducedMap& f = sys.maps[static_cast<std::size_t>(i)];
    if (f.zero_row0 || f.zero_row1)
      throw CantorError(ErrorKind::ZeroRowSum, "integrand unbounded for index " + std::to_string(i));
    const double denom = phi.a * f.delta - phi.b * f.gamma;
    const double arg = denom / (2.0 * phi.a);
    if (!(arg > 0.0))
      throw CantorError(ErrorKind::RatioNotContractive,
                        "log argument not positive for index " + std::to_string(i));
    a[0] += sys.prob(i) * std::log(arg);
    ratios.push_back((phi.c * f.delta - phi.d * f.gamma) / denom);
    probs.push_back(sys.prob(i));
  }

  double cupow = 1.0;
  std::vector<double> rpow(ratios.size(), 1.0);
  for (int n = 1; n < N; ++n) {
    cupow *= cu;
    double acc = cupow;
    for (std::size_t s = 0; s < ratios.size(); ++s) {
      rpow[s] *= ratios[s];
      acc -= probs[s] * rpow[s];
    }
    a[static_cast<std::size_t>(n)] = acc / n;
  }
  return a;
}

TruncationPlan truncation_plan(const NacReport& report, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!report.passed && !report.inconclusive)
    throw CantorError(ErrorKind::MethodInapplicable,
                      "NAC not satisfied: " + (report.reason.empty() ? "unknown" : report.reason));

  TruncationPlan plan;
  plan.eps = eps;
  plan.r = report.r;
  plan.E = report.E;
  plan.norm_bound = report.norm_bound;

  const double log_half_eps = std::log(eps) - std::log(2.0);

  // Smallest M with norm_bound^{M+1}/(1 - norm_bound) < eps/2, in log space.
  const double lnb = std::log(plan.norm_bound);
  const double target_m = log_half_eps + std::log1p(-plan.norm_bound);
  long long M = 1;
  if (plan.norm_bound > 0.0 && lnb < 0.0) {
    M = std::max<long long>(1, static_cast<long long>(std::floor(target_m / lnb)) - 2);
    while ((M + 1) * lnb >= target_m) ++M;
    while (M > 1 && M * lnb < target_m) --M;
  }
  plan.M = M;

  // Smallest N with M(M+1)/2 * E r^{N-1} < eps/2.
  const double lr = std::log(plan.r);
  const double lhs0 = std::log(0.5 * static_cast<double>(M) * static_cast<double>(M + 1)) +
                      std::log(plan.E);
  long long N = 1;
  if (plan.r > 0.0 && lr < 0.0) {
    N = std::max<long long>(1, static_cast<long long>(std::floor((log_half_eps - lhs0) / lr)) - 2);
    while (lhs0 + (N - 1) * lr >= log_half_eps) ++N;
    while (N > 1 && lhs0 + (N - 2) * lr < log_half_eps) --N;
  }
  plan.N = N;
  plan.R_N = (N == 1) ? plan.E : plan.E * std::exp((N - 1) * lr);
  return plan;
}

LyapunovResult lyapunov_neumann(const IfsSystem& sys, const MoebiusMap& phi, double eps) {
  NacReport rep = nac_report(sys, phi);
  if (!rep.passed)
    throw CantorError(ErrorKind::MethodInapplicable,
                      "NAC not satisfied: " + (rep.reason.empty() ? "unknown" : rep.reason));
  TruncationPlan plan = truncation_plan(rep, eps);
  if (plan.N > 40000)
    throw CantorError(ErrorKind::MethodInapplicable,
                      "operator truncation size " + std::to_string(plan.N) +
                          " exceeds the evaluation budget; raise eps");

  const int N = static_cast<int>(plan.N);
  TruncatedOperator T = build_T(sys, phi, N);
  std::vector<double> a = a_vector(sys, phi, N);

  double lambda = a[0];
  std::vector<double> x = a;
  for (long long n = 1; n <= plan.M; ++n) {
    x = T.apply(x);
    lambda += x[0];
  }

  LyapunovResult res;
  res.lambda = lambda;
  res.dimension = lambda / std::log(static_cast<double>(sys.b));
  res.method = Method::Neumann;
  res.error_bound = eps;
  res.metadata = {
      {"phi", {phi.a, phi.b, phi.c, phi.d}},
      {"M", plan.M},
      {"N", plan.N},
      {"norm_bound", plan.norm_bound},
      {"r", plan.r},
      {"E", plan.E},
      {"R_N", plan.R_N},
  };
  return res;
}

}  // namespace cantordim
