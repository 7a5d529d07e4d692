#pragma once

#include <array>
#include <optional>
#include <vector>

#include "cantordim/measures.hpp"

namespace cantordim {

/// Nonnegative integer 2x2 matrix of set-intersection counts.
struct Mat2 {
  std::array<std::array<long long, 2>, 2> a{};

  long long& operator()(int i, int j) { return a[i][j]; }
  long long operator()(int i, int j) const { return a[i][j]; }
  long long det() const { return a[0][0] * a[1][1] - a[0][1] * a[1][0]; }
  long long row_sum(int i) const { return a[i][0] + a[i][1]; }
  bool operator==(const Mat2&) const = default;
};

/// Base b plus the two digit subsets defining the Cantor sets.
struct DigitPair {
  int b = 0;
  std::vector<int> d1, d2;

  void validate() const;
};

/// The b transfer matrices; entry (i,j) of mats[u] counts
/// (D1 + i + u) n (D2 + j*b).
struct TransferMatrices {
  int b = 0;
  std::vector<Mat2> mats;
};

TransferMatrices build_matrices(const DigitPair& pair);

/// Smallest mu-valid index whose matrix has rank <= 1 (exact integer
/// determinant), or empty when none.
std::optional<int> is_degenerate(const TransferMatrices& tm, const ProductMeasure& mu);

enum class MissingOneClass { Degenerate, KernelExpandable };

/// Classification for pairs missing exactly one digit each: D1 misses tau,
/// D2 misses u. Requires b >= 7.
MissingOneClass classify_missing_one(int b, int tau, int u);

/// Closed-form matrices for D1 = {0..b-1}\{tau}, D2 = {0..b-1}\{b-1-tau}.
/// Agrees with build_matrices on the same pair for every 1 <= tau <= b-2.
TransferMatrices toothless_matrices(int b, int tau);

}  // namespace cantordim
