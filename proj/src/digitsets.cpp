#include "cantordim/digitsets.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cantordim {

void DigitPair::validate() const {
  if (b < 2) throw std::invalid_argument("digit pair: base must be >= 2");
  for (const auto* d : {&d1, &d2}) {
    if (d->empty()) throw std::invalid_argument("digit pair: digit sets must be nonempty");
    for (std::size_t k = 0; k < d->size(); ++k) {
      int v = (*d)[k];
      if (v < 0 || v >= b) throw std::invalid_argument("digit pair: digit out of [0, b-1]");
      if (k > 0 && (*d)[k] <= (*d)[k - 1])
        throw std::invalid_argument("digit pair: digits must be strictly increasing");
    }
  }
}

TransferMatrices build_matrices(const DigitPair& pair) {
  pair.validate();
  const int b = pair.b;
  std::vector<char> in_d2(static_cast<std::size_t>(b), 0);
  for (int v : pair.d2) in_d2[static_cast<std::size_t>(v)] = 1;

  // A_u(i,j) = #((D1 + i + u) n (D2 + j*b)): count d in D1 with
  // d + i + u - j*b in D2.
  TransferMatrices tm{b, std::vector<Mat2>(static_cast<std::size_t>(b))};
  for (int u = 0; u < b; ++u) {
    Mat2 m;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        long long count = 0;
        for (int d : pair.d1) {
          int t = d + i + u - j * b;
          if (t >= 0 && t < b && in_d2[static_cast<std::size_t>(t)]) ++count;
        }
        m(i, j) = count;
      }
    tm.mats[static_cast<std::size_t>(u)] = m;
  }
  return tm;
}

std::optional<int> is_degenerate(const TransferMatrices& tm, const ProductMeasure& mu) {
  mu.validate();
  if (mu.size() != tm.b) throw std::invalid_argument("measure size must match base");
  for (int i = 0; i < tm.b; ++i) {
    if (mu.p[static_cast<std::size_t>(i)] <= 0.0) continue;
    if (tm.mats[static_cast<std::size_t>(i)].det() == 0) return i;
  }
  return std::nullopt;
}

MissingOneClass classify_missing_one(int b, int tau, int u) {
  if (b < 7) throw std::invalid_argument("classify_missing_one: requires b >= 7");
  if (tau < 0 || tau >= b || u < 0 || u >= b)
    throw std::invalid_argument("classify_missing_one: tau, u must lie in [0, b-1]");
  const bool interior = (tau != 0 && tau != b - 1);
  if (interior && tau + u == b - 1) return MissingOneClass::KernelExpandable;
  return MissingOneClass::Degenerate;
}

namespace {

// Overlap counts g(s) = #((D1+s) n D2) and h(s) = #((D1+s) n (D2+b)) for the
// pair D1 = full\{tau}, D2 = full\{b-1-tau}, valid when 2*tau >= b-1. The
// removed digits tau+s and b-1-tau coincide at s = b-1-2*tau, which matters
// only for tau = (b-1)/2 at s = 0.
long long toothless_g(int b, int tau, int s) {
  if (s < b - tau) {
    long long v = b - s - 2;
    if (s == b - 1 - 2 * tau) ++v;
    return v;
  }
  return b - s;
}

long long toothless_h(int b, int tau, int s) {
  if (s < b - tau) return s;
  if (s == 2 * b - 2 * tau - 1) return s - 1;
  return s - 2;
}

Mat2 flip(const Mat2& m) {
  // J m J with J the order-reversal permutation: both rows and columns swap.
  Mat2 r;
  r(0, 0) = m(1, 1);
  r(0, 1) = m(1, 0);
  r(1, 0) = m(0, 1);
  r(1, 1) = m(0, 0);
  return r;
}

}  // namespace

TransferMatrices toothless_matrices(int b, int tau) {
  if (b < 7) throw std::invalid_argument("toothless_matrices: requires b >= 7");
  if (tau < 1 || tau > b - 2)
    throw std::invalid_argument("toothless_matrices: requires 1 <= tau <= b-2");

  if (2 * tau >= b - 1) {
    TransferMatrices tm{b, std::vector<Mat2>(static_cast<std::size_t>(b))};
    for (int i = 0; i < b; ++i) {
      Mat2 m;
      m(0, 0) = toothless_g(b, tau, i);
      m(0, 1) = toothless_h(b, tau, i);
      m(1, 0) = toothless_g(b, tau, i + 1);
      m(1, 1) = toothless_h(b, tau, i + 1);
      tm.mats[static_cast<std::size_t>(i)] = m;
    }
    return tm;
  }

  // tau below the midpoint: the pair is the digit-reversal of the pair for
  // tau' = b-1-tau, which swaps D1 and D2; the matrices transform as
  // A_u = J A'_{b-1-u} J.
  TransferMatrices mirror = toothless_matrices(b, b - 1 - tau);
  TransferMatrices tm{b, std::vector<Mat2>(static_cast<std::size_t>(b))};
  for (int u = 0; u < b; ++u)
    tm.mats[static_cast<std::size_t>(u)] = flip(mirror.mats[static_cast<std::size_t>(b - 1 - u)]);
  return tm;
}

}  // namespace cantordim
