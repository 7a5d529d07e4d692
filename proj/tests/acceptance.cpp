// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "cantordim/cli.hpp"
#include "cantordim/degenerate.hpp"
#include "cantordim/errors.hpp"
#include "cantordim/neumann.hpp"
#include "cantordim/oracle.hpp"
#include "cantordim/recurring.hpp"

using namespace cantordim;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

void run_criterion(int criterion, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    auto [ok, detail] = body();
    report(criterion, ok, detail);
  } catch (const std::exception& e) {
    report(criterion, false, std::string("exception: ") + e.what());
  }
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

const MoebiusMap kPhi7{7, 4, 4, 16};
const MoebiusMap kPhi7Fast{0.3769, -0.2768, -0.1973, 1.0};
const MoebiusMap kPhi9{-0.3914, -0.055, -0.0639, 1.0};
// Monte Carlo fixture seed. The estimator itself is seed-deterministic; a
// fixed seed keeps the statistical criteria reproducible.
constexpr std::uint64_t kMcSeed = 3;

Mat2 mat(long long p, long long q, long long r, long long s) {
  Mat2 m;
  m(0, 0) = p;
  m(0, 1) = q;
  m(1, 0) = r;
  m(1, 1) = s;
  return m;
}

}  // namespace

int main() {
  IfsSystem ms7 = make_system(DigitPair{7, {0, 1, 2, 4, 5, 6}, {0, 1, 2, 4, 5, 6}}, lebesgue(7));
  IfsSystem b9 = make_system(DigitPair{9, {0, 1, 4, 5, 7, 8}, {0, 2, 3, 5, 6, 8}}, lebesgue(9));
  IfsSystem e15 = make_system(DigitPair{7, {0, 2, 5}, {0, 1, 2, 4, 6}},
                              ProductMeasure{{0, 0.5, 0, 0.5, 0, 0, 0}});
  IfsSystem e13 = make_system(DigitPair{4, {0, 1, 2}, {0, 1, 2}}, lebesgue(4));
  TransferMatrices mt = build_matrices({3, {0, 2}, {0, 2}});

  LyapunovResult ms7_res, b9_res, e15_res, e13_res;

  // 1. middle-seventh via Neumann with the published phi at eps = 1e-10.
  run_criterion(1, [&]() -> std::pair<bool, std::string> {
    auto t0 = Clock::now();
    ms7_res = lyapunov_neumann(ms7, kPhi7, 1e-10);
    const double secs = seconds_since(t0);
    const double dl = std::fabs(ms7_res.lambda - 1.6363797884);
    const double dd = std::fabs(ms7_res.dimension - 0.8409328607);
    const bool ok = dl <= 1e-9 && dd <= 1e-9 && secs <= 60.0;
    return {ok, fmt("middle-seventh lambda=%.12f (|d|=%.1e) dim=%.12f (|d|=%.1e) in %.1fs",
                    ms7_res.lambda, dl, ms7_res.dimension, dd, secs)};
  });

  // 2. b = 9 example with the published phi.
  run_criterion(2, [&]() -> std::pair<bool, std::string> {
    b9_res = lyapunov_neumann(b9, kPhi9, 1e-10);
    const double dl = std::fabs(b9_res.lambda - 1.3770228916);
    const double dd = std::fabs(b9_res.dimension - 0.6267101259);
    const bool ok = dl <= 1e-9 && dd <= 1e-9;
    return {ok, fmt("b=9 lambda=%.12f (|d|=%.1e) dim=%.12f (|d|=%.1e)", b9_res.lambda, dl,
                    b9_res.dimension, dd)};
  });

  // 3. truncation plans match the published (M, N) pairs exactly.
  run_criterion(3, [&]() -> std::pair<bool, std::string> {
    NacReport rep = nac_report(ms7, kPhi7);
    NacReport rep0 = nac_report(ms7, kPhi7Fast);
    TruncationPlan a = truncation_plan(rep, 1e-4);
    TruncationPlan b = truncation_plan(rep0, 1e-4);
    TruncationPlan c = truncation_plan(rep0, 1e-50);
    const bool ok = a.M == 112 && a.N == 697 && b.M == 87 && b.N == 182 && c.M == 863 &&
                    c.N == 1251;
    return {ok, fmt("plans (%lld,%lld) (%lld,%lld) (%lld,%lld) vs (112,697) (87,182) (863,1251)",
                    a.M, a.N, b.M, b.N, c.M, c.N)};
  });

  // 4. operator norm bound for the middle-seventh phi. In exact arithmetic
  //    rho1/(1-rho1) equals 649/723, so allow one ulp on the comparison.
  run_criterion(4, [&]() -> std::pair<bool, std::string> {
    NacReport rep = nac_report(ms7, kPhi7);
    const double limit = 649.0 / 723.0;
    const bool ok = rep.passed && rep.norm_bound < 0.89765 &&
                    rep.norm_bound <= limit * (1.0 + 4e-16);
    return {ok, fmt("norm_bound=%.15f vs 649/723=%.15f", rep.norm_bound, limit)};
  });

  // 5. b=7 two-map example by the recurring method, plus termwise agreement
  //    of the generic coefficients with the published series.
  run_criterion(5, [&]() -> std::pair<bool, std::string> {
    auto data = find_affine_conjugator(e15);
    if (!data) return {false, "no affine conjugator found"};
    e15_res = lyapunov_recurring(e15, *data, 1e-8);
    const double dl = std::fabs(e15_res.lambda - 0.693147);
    const double dd = std::fabs(e15_res.dimension - 0.356207);
    bool ok = dl <= 1e-6 && dd <= 1e-6;

    // Published series under the published phi:
    // a_0 = (log 13 + log 31 - log 72)/2,
    // a_n = (1/(2n)) { (-1)^{n-1} ((8/31)^n - 2 (2/3)^n) - (4/13)^n }.
    double worst = 0.0;
    const MoebiusMap phi{6, 1, -4, 12};
    for (int n = 0; n <= 30; ++n) {
      double an = 0.0;
      for (int i : e15.valid)
        an += e15.prob(i) *
              log_norm_coefficients(e15.maps[static_cast<std::size_t>(i)], phi).coeff(n);
      double paper;
      if (n == 0) {
        paper = 0.5 * (std::log(13.0) + std::log(31.0) - std::log(72.0));
      } else {
        const double sign = (n % 2) ? 1.0 : -1.0;
        paper = (sign * (std::pow(8.0 / 31.0, n) - 2.0 * std::pow(2.0 / 3.0, n)) -
                 std::pow(4.0 / 13.0, n)) /
                (2.0 * n);
      }
      worst = std::max(worst, std::fabs(an - paper));
    }
    ok = ok && worst <= 1e-12;
    return {ok, fmt("recurring lambda=%.9f (|d|=%.1e) dim=%.9f (|d|=%.1e) series |d|max=%.1e",
                    e15_res.lambda, dl, e15_res.dimension, dd, worst)};
  });

  // 6. b=4 example by the degenerate series, with j-choice invariance.
  run_criterion(6, [&]() -> std::pair<bool, std::string> {
    auto t0 = Clock::now();
    e13_res = lyapunov_degenerate(e13, 0, 1e-4);
    LyapunovResult alt = lyapunov_degenerate(e13, 3, 1e-4);
    const double secs = seconds_since(t0);
    const double dl = std::fabs(e13_res.lambda - 0.797435);
    const double dd = std::fabs(e13_res.dimension - 0.575228);
    const double dj = std::fabs(e13_res.lambda - alt.lambda);
    const bool ok = dl <= 1e-4 && dd <= 1e-4 && e13_res.error_bound <= 1e-4 &&
                    dj <= e13_res.error_bound + alt.error_bound && secs <= 60.0;
    return {ok, fmt("degenerate lambda=%.8f (|d|=%.1e) dim=%.8f (|d|=%.1e) bound=%.1e "
                    "|lambda_j0-lambda_j3|=%.1e in %.1fs",
                    e13_res.lambda, dl, e13_res.dimension, dd, e13_res.error_bound, dj, secs)};
  });

  // 7. Hawkes cross-check by the Monte Carlo oracle.
  run_criterion(7, [&]() -> std::pair<bool, std::string> {
    McEstimate mc = mc_lyapunov(mt, lebesgue(3), 1'000'000, 20, kMcSeed);
    const double target = std::log(2.0) / 3.0;
    const double dev = std::fabs(mc.estimate - target);
    const bool ok = dev <= 3.0 * mc.standard_error && mc.standard_error <= 2e-3;
    return {ok, fmt("MC=%.8f target=%.8f |d|=%.1e se=%.1e (%.2f sigma)", mc.estimate, target,
                    dev, mc.standard_error, dev / mc.standard_error)};
  });

  // 8. classification agrees with rank-one scanning for all b in [7, 20].
  run_criterion(8, [&]() -> std::pair<bool, std::string> {
    long long mismatches = 0, cases = 0;
    for (int b = 7; b <= 20; ++b)
      for (int tau = 0; tau < b; ++tau)
        for (int u = 0; u < b; ++u) {
          ++cases;
          std::vector<int> d1, d2;
          for (int v = 0; v < b; ++v) {
            if (v != tau) d1.push_back(v);
            if (v != u) d2.push_back(v);
          }
          const bool rank_one =
              is_degenerate(build_matrices({b, d1, d2}), lebesgue(b)).has_value();
          const bool degenerate =
              classify_missing_one(b, tau, u) == MissingOneClass::Degenerate;
          if (rank_one != degenerate) ++mismatches;
        }
    return {mismatches == 0, fmt("%lld (tau, u) cases, %lld mismatches", cases, mismatches)};
  });

  // 9. both published matrix lists are reproduced exactly.
  run_criterion(9, [&]() -> std::pair<bool, std::string> {
    const Mat2 want7[7] = {mat(6, 0, 4, 1), mat(4, 1, 3, 2), mat(3, 2, 2, 3), mat(2, 3, 3, 2),
                           mat(3, 2, 2, 3), mat(2, 3, 1, 4), mat(1, 4, 0, 6)};
    const Mat2 want9[9] = {mat(3, 0, 4, 1), mat(4, 1, 3, 1), mat(3, 1, 2, 1),
                           mat(2, 1, 2, 3), mat(2, 3, 2, 2), mat(2, 2, 1, 2),
                           mat(1, 2, 1, 4), mat(1, 4, 1, 3), mat(1, 3, 0, 3)};
    bool ok = true;
    for (int u = 0; u < 7; ++u) ok = ok && ms7.mats.mats[u] == want7[u];
    for (int u = 0; u < 9; ++u) ok = ok && b9.mats.mats[u] == want9[u];
    return {ok, "middle-seventh and b=9 transfer-matrix lists"};
  });

  // 10. operator expansion identity at the plan size for eps = 1e-4.
  run_criterion(10, [&]() -> std::pair<bool, std::string> {
    NacReport rep = nac_report(ms7, kPhi7);
    const int N = static_cast<int>(truncation_plan(rep, 1e-4).N);
    TruncatedOperator T = build_T(ms7, kPhi7, N);
    const double tol =
        1e-10 + rep.rho3 * std::pow(rep.rho4, N - 1) / (1.0 - rep.rho4);
    double worst = 0.0;
    for (int n = 1; n <= 20; ++n)
      for (int g = 0; g < 10; ++g) {
        const double x = -0.9 + 0.2 * g;
        double lhs = 0.0, pw = 1.0;
        for (int k = 0; k < N; ++k) {
          lhs += T.at(k, n) * pw;
          pw *= kPhi7(x);
        }
        double rhs = 0.0;
        for (int i : ms7.valid)
          rhs += ms7.prob(i) * std::pow(kPhi7(ms7.maps[static_cast<std::size_t>(i)].map(x)), n);
        worst = std::max(worst, std::fabs(lhs - rhs));
      }
    return {worst <= tol, fmt("N=%d max defect %.2e vs tolerance %.2e", N, worst, tol)};
  });

  // 11. methods agree pairwise within summed error bounds on every instance
  //     where at least two of them apply.
  run_criterion(11, [&]() -> std::pair<bool, std::string> {
    bool ok = true;
    std::string detail;
    auto compare = [&](const char* name, double lam, double bound, const TransferMatrices& tm,
                       const ProductMeasure& mu) {
      McEstimate mc = mc_lyapunov(tm, mu, 1'000'000, 20, kMcSeed);
      const double dev = std::fabs(lam - mc.estimate);
      const double budget = bound + 3.0 * mc.standard_error;
      ok = ok && dev <= budget;
      detail += fmt("%s |d|=%.1e<=%.1e ", name, dev, budget);
    };
    compare("e13-deg-vs-mc", e13_res.lambda, e13_res.error_bound, e13.mats, e13.measure);
    compare("e15-rec-vs-mc", e15_res.lambda, e15_res.error_bound, e15.mats, e15.measure);
    compare("ms7-neu-vs-mc", ms7_res.lambda, ms7_res.error_bound, ms7.mats, ms7.measure);
    compare("b9-neu-vs-mc", b9_res.lambda, b9_res.error_bound, b9.mats, b9.measure);
    return {ok, detail};
  });

  // 12. wall-clock grows no faster than cubically in log(1/eps): with
  //     c fitted on the first point, every t_i must stay below 2 c L_i^3.
  run_criterion(12, [&]() -> std::pair<bool, std::string> {
    const double epses[3] = {1e-4, 1e-8, 1e-12};
    double u[3];
    std::string detail;
    for (int k = 0; k < 3; ++k) {
      auto t0 = Clock::now();
      lyapunov_neumann(ms7, kPhi7, epses[k]);
      const double secs = seconds_since(t0);
      const double L = std::log(1.0 / epses[k]);
      u[k] = secs / (L * L * L);
      detail += fmt("t(%g)=%.2fs ", epses[k], secs);
    }
    const double residual = std::max({u[0], u[1], u[2]}) / u[0];
    detail += fmt("residual=%.2f", residual);
    return {residual <= 2.0, detail};
  });

  std::printf("%d of 12 criteria passed\n", 12 - g_failures);
  return g_failures;
}
