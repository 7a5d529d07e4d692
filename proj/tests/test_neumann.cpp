#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "cantordim/errors.hpp"
#include "cantordim/neumann.hpp"
#include "cantordim/recurring.hpp"
#include "cantordim/rng.hpp"

using namespace cantordim;

namespace {

Mat2 mat(long long p, long long q, long long r, long long s) {
  Mat2 m;
  m(0, 0) = p;
  m(0, 1) = q;
  m(1, 0) = r;
  m(1, 1) = s;
  return m;
}

IfsSystem middle_seventh() {
  return make_system(DigitPair{7, {0, 1, 2, 4, 5, 6}, {0, 1, 2, 4, 5, 6}}, lebesgue(7));
}

const MoebiusMap kPhi7{7, 4, 4, 16};
const MoebiusMap kPhi7Fast{0.3769, -0.2768, -0.1973, 1.0};

// Independent construction of the operator columns: the series of
// phi o f_i is geometric, and column n is column n-1 convolved with it.
std::vector<std::vector<double>> columns_by_convolution(const IfsSystem& sys,
                                                        const MoebiusMap& phi, int N) {
  std::vector<std::vector<double>> total(static_cast<std::size_t>(N),
                                         std::vector<double>(static_cast<std::size_t>(N), 0.0));
  for (int i : sys.valid) {
    const ConjugationData c = conjugate(phi, sys.maps[static_cast<std::size_t>(i)].map);
    const double t = c.p2 / c.q2;
    const double w = -c.q1 / c.q2;
    const double d = c.p2 / c.q2 - c.p1 / c.q1;
    std::vector<double> base(static_cast<std::size_t>(N), 0.0);
    base[0] = t;
    for (int k = 1; k < N; ++k) base[static_cast<std::size_t>(k)] = d * std::pow(w, k);
    std::vector<double> col = base;
    for (int n = 1; n < N; ++n) {
      for (int k = 0; k < N; ++k)
        total[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] +=
            sys.prob(i) * col[static_cast<std::size_t>(k)];
      if (n + 1 < N) {
        std::vector<double> nxt(static_cast<std::size_t>(N), 0.0);
        for (int a = 0; a < N; ++a) {
          if (col[static_cast<std::size_t>(a)] == 0.0) continue;
          for (int b2 = 0; a + b2 < N; ++b2)
            nxt[static_cast<std::size_t>(a + b2)] +=
                col[static_cast<std::size_t>(a)] * base[static_cast<std::size_t>(b2)];
        }
        col.swap(nxt);
      }
    }
  }
  return total;  // total[n][k] = b_{k,n} for n >= 1
}

}  // namespace

TEST_CASE("admissibility report for the middle-seventh phi") {
  IfsSystem sys = middle_seventh();
  NacReport rep = nac_report(sys, kPhi7);
  REQUIRE(rep.passed);
  CHECK(!rep.inconclusive);
  // The conjugations are integer matrices, so the constants are exact
  // rationals.
  CHECK(rep.rho1 == doctest::Approx(649.0 / 1372.0).epsilon(1e-15));
  CHECK(rep.rho2 == doctest::Approx(649.0 / 1372.0).epsilon(1e-15));
  // Index 6 dominates rho4: u3 = 52/83, m = u2 = 384/1079.
  CHECK(rep.rho4 == doctest::Approx((52.0 / 83.0) / (1.0 - 384.0 / 1079.0)).epsilon(1e-13));
  CHECK(rep.ratio_phi == doctest::Approx(4.0 / 7.0).epsilon(1e-15));
  CHECK(rep.max_ratio_map == doctest::Approx(60.0 / 81.0).epsilon(1e-15));
  CHECK(rep.norm_bound <= 649.0 / 723.0 + 1e-15);
  CHECK(rep.norm_bound == doctest::Approx(649.0 / 723.0).epsilon(1e-14));
  CHECK(rep.margin >= 1e-9);
}

TEST_CASE("admissibility for the toothless pair b=30, tau=20") {
  IfsSystem sys = make_system(toothless_matrices(30, 20), lebesgue(30));
  NacReport rep = nac_report(sys, MoebiusMap{15, 4, 5, 40});
  REQUIRE(rep.passed);
  CHECK(rep.rho1 <= 0.43 + 1e-9);
  CHECK(rep.rho2 <= 0.43 + 1e-9);
  CHECK(rep.rho3 <= 0.43 + 1e-9);
  CHECK(rep.rho4 <= 0.59 + 1e-9);
}

TEST_CASE("identity phi fails with rho1 reported") {
  IfsSystem sys = middle_seventh();
  NacReport rep = nac_report(sys, MoebiusMap{1, 0, 0, 1});
  CHECK(!rep.passed);
  CHECK(rep.rho1 >= 0.5);  // f_0 alone gives |p2/q2| = 9/11
}

TEST_CASE("constant mu-valid maps are rejected") {
  IfsSystem sys = make_system(DigitPair{4, {0, 1, 2}, {0, 1, 2}}, lebesgue(4));
  CHECK_THROWS_AS(nac_report(sys, kPhi7), CantorError);
}

TEST_CASE("singular phi is rejected") {
  IfsSystem sys = middle_seventh();
  CHECK_THROWS_AS(nac_report(sys, MoebiusMap{2, 4, 1, 2}), CantorError);
}

TEST_CASE("operator truncation") {
  IfsSystem sys = middle_seventh();

  SUBCASE("column 0 is identically zero and row 0 is sum p_i t_i^n") {
    const int N = 64;
    TruncatedOperator T = build_T(sys, kPhi7, N);
    for (int k = 0; k < N; ++k) CHECK(T.at(k, 0) == 0.0);
    std::vector<double> t_ratios;
    for (int i : sys.valid) {
      ConjugationData c = conjugate(kPhi7, sys.maps[static_cast<std::size_t>(i)].map);
      t_ratios.push_back(c.p2 / c.q2);
    }
    for (int n = 1; n < N; ++n) {
      double expect = 0.0;
      for (std::size_t s = 0; s < t_ratios.size(); ++s)
        expect += sys.prob(sys.valid[s]) * std::pow(t_ratios[s], n);
      CHECK(T.at(0, n) == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  SUBCASE("entries match an independent convolution construction") {
    const int N = 80;
    TruncatedOperator T = build_T(sys, kPhi7, N);
    auto cols = columns_by_convolution(sys, kPhi7, N);
    double worst = 0.0;
    for (int n = 1; n < N; ++n)
      for (int k = 0; k < N; ++k)
        worst = std::max(worst, std::fabs(T.at(k, n) -
                                          cols[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)]));
    CHECK(worst <= 1e-11);
  }

  SUBCASE("affine conjugations reduce to the plain binomial expansion") {
    IfsSystem e15 = make_system(DigitPair{7, {0, 2, 5}, {0, 1, 2, 4, 6}},
                                ProductMeasure{{0, 0.5, 0, 0.5, 0, 0, 0}});
    const MoebiusMap phi{6, 1, -4, 12};  // conjugates both maps to affine ones
    const int N = 40;
    TruncatedOperator T = build_T(e15, phi, N);
    const double r[2] = {0.5, -0.5}, s[2] = {7.0 / 16.0, 0.125};
    for (int n = 1; n < N; ++n)
      for (int k = 0; k < N; ++k) {
        double expect = 0.0;
        for (int i = 0; i < 2; ++i) {
          if (k > n) continue;
          double binom = 1.0;
          for (int j = 1; j <= k; ++j) binom *= static_cast<double>(n - k + j) / j;
          expect += 0.5 * binom * std::pow(r[i], k) * std::pow(s[i], n - k);
        }
        CHECK(std::fabs(T.at(k, n) - expect) <= 1e-12);
      }
  }

  SUBCASE("expansion identity holds pointwise") {
    const int N = 300;
    NacReport rep = nac_report(sys, kPhi7);
    TruncatedOperator T = build_T(sys, kPhi7, N);
    const double tail = rep.rho3 * std::pow(rep.rho4, N - 1) / (1.0 - rep.rho4);
    for (int n = 1; n <= 20; ++n) {
      for (int g = 0; g < 10; ++g) {
        const double x = -0.9 + 0.2 * g;
        double lhs = 0.0;
        double pw = 1.0;
        for (int k = 0; k < N; ++k) {
          lhs += T.at(k, n) * pw;
          pw *= kPhi7(x);
        }
        double rhs = 0.0;
        for (int i : sys.valid)
          rhs += sys.prob(i) * std::pow(kPhi7(sys.maps[static_cast<std::size_t>(i)].map(x)), n);
        CHECK(std::fabs(lhs - rhs) <= 1e-10 + tail);
      }
    }
  }

  SUBCASE("sup-norm stays below the certified bound") {
    const int N = 200;
    NacReport rep = nac_report(sys, kPhi7);
    TruncatedOperator T = build_T(sys, kPhi7, N);
    CounterRng rng(31, 9);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> x(static_cast<std::size_t>(N));
      double sup = 0.0;
      for (double& v : x) {
        v = 2.0 * rng.uniform() - 1.0;
        sup = std::max(sup, std::fabs(v));
      }
      for (double& v : x) v /= sup;
      std::vector<double> y = T.apply(x);
      double ynorm = 0.0;
      for (double v : y) ynorm = std::max(ynorm, std::fabs(v));
      CHECK(ynorm <= rep.norm_bound + 1e-9);
    }
  }

  SUBCASE("(T x)_0 ignores x_0") {
    const int N = 48;
    TruncatedOperator T = build_T(sys, kPhi7, N);
    std::vector<double> x(static_cast<std::size_t>(N), 0.5);
    std::vector<double> y(static_cast<std::size_t>(N), 0.5);
    y[0] = -123.0;
    CHECK(T.apply(x)[0] == T.apply(y)[0]);
  }
}

TEST_CASE("a-vector") {
  IfsSystem sys = middle_seventh();

  SUBCASE("worked constants") {
    std::vector<double> a = a_vector(sys, kPhi7, 64);
    const double expect0 =
        (2 * std::log(5.5) + 5 * std::log(5.0) + std::log(73.0 / 77.0) + std::log(81.0 / 77.0)) /
        7.0;
    CHECK(a[0] == doctest::Approx(expect0).epsilon(1e-14));
    for (int n = 1; n < 64; ++n) {
      const double expect = -(std::pow(28.0 / 73.0, n) - 2 * std::pow(4.0 / 7.0, n) +
                              std::pow(60.0 / 81.0, n)) /
                            (7.0 * n);
      CHECK(std::fabs(a[static_cast<std::size_t>(n)] - expect) <= 1e-14);
    }
  }
  SUBCASE("termwise equal to the measure-weighted coefficient streams") {
    std::vector<double> a = a_vector(sys, kPhi7, 101);
    for (int n = 0; n <= 100; ++n) {
      double expect = 0.0;
      for (int i : sys.valid)
        expect +=
            sys.prob(i) * log_norm_coefficients(sys.maps[static_cast<std::size_t>(i)], kPhi7).coeff(n);
      CHECK(std::fabs(a[static_cast<std::size_t>(n)] - expect) <= 1e-13);
    }
  }
  SUBCASE("affine maps under affine phi keep only a_0") {
    TransferMatrices tm{2, {mat(2, 1, 1, 2), mat(3, 1, 1, 3)}};
    IfsSystem affine = make_system(tm, lebesgue(2));
    std::vector<double> a = a_vector(affine, MoebiusMap{0.5, 0, 0, 1}, 16);
    CHECK(a[0] == doctest::Approx(0.5 * (std::log(3.0) + std::log(4.0))).epsilon(1e-15));
    for (int n = 1; n < 16; ++n) CHECK(a[static_cast<std::size_t>(n)] == 0.0);
  }
}

TEST_CASE("truncation plans reproduce the published pairs") {
  IfsSystem sys = middle_seventh();
  NacReport rep = nac_report(sys, kPhi7);
  TruncationPlan p = truncation_plan(rep, 1e-4);
  CHECK(p.M == 112);
  CHECK(p.N == 697);

  NacReport rep0 = nac_report(sys, kPhi7Fast);
  REQUIRE(rep0.passed);
  TruncationPlan q = truncation_plan(rep0, 1e-4);
  CHECK(q.M == 87);
  CHECK(q.N == 182);
  TruncationPlan q50 = truncation_plan(rep0, 1e-50);
  CHECK(q50.M == 863);
  CHECK(q50.N == 1251);
}

TEST_CASE("lambda evaluation") {
  SUBCASE("plan validity on the b=9 system") {
    IfsSystem sys9 = make_system(DigitPair{9, {0, 1, 4, 5, 7, 8}, {0, 2, 3, 5, 6, 8}}, lebesgue(9));
    const MoebiusMap phi9{-0.3914, -0.055, -0.0639, 1.0};
    LyapunovResult coarse = lyapunov_neumann(sys9, phi9, 1e-4);
    LyapunovResult fine = lyapunov_neumann(sys9, phi9, 1e-6);
    CHECK(std::fabs(coarse.lambda - fine.lambda) <= 1e-4);
    CHECK(std::fabs(fine.lambda - 1.3770228916) <= 1e-6);
  }
  SUBCASE("phi-independence on the middle-seventh system") {
    IfsSystem sys = middle_seventh();
    LyapunovResult a = lyapunov_neumann(sys, kPhi7, 1e-4);
    LyapunovResult b = lyapunov_neumann(sys, kPhi7Fast, 1e-4);
    CHECK(std::fabs(a.lambda - b.lambda) <= a.error_bound + b.error_bound);
  }
  SUBCASE("vanishing higher coefficients collapse lambda to a_0") {
    TransferMatrices tm{2, {mat(2, 1, 1, 2), mat(3, 1, 1, 3)}};
    IfsSystem affine = make_system(tm, lebesgue(2));
    LyapunovResult res = lyapunov_neumann(affine, MoebiusMap{0.5, 0, 0, 1}, 1e-10);
    CHECK(res.lambda == doctest::Approx(0.5 * (std::log(3.0) + std::log(4.0))).epsilon(1e-15));
  }
  SUBCASE("failing reports refuse to evaluate") {
    IfsSystem sys = middle_seventh();
    CHECK_THROWS_AS(lyapunov_neumann(sys, MoebiusMap{1, 0, 0, 1}, 1e-6), CantorError);
  }
}
