#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace cantordim {

/// I.i.d. digit distribution (p_0, ..., p_{b-1}); uniform weights stand in
/// for the Lebesgue measure. This is the only measure class the
/// computational theorems here require; Markov/Gibbs measures are out of
/// scope.
struct ProductMeasure {
  std::vector<double> p;

  int size() const { return static_cast<int>(p.size()); }

  void validate() const {
    if (p.size() < 1) throw std::invalid_argument("measure needs at least one atom");
    double sum = 0.0;
    for (double w : p) {
      if (!(w >= 0.0)) throw std::invalid_argument("measure weights must be >= 0");
      sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("measure weights must sum to 1 within 1e-12");
  }
};

/// Uniform digit distribution on b atoms.
inline ProductMeasure lebesgue(int b) {
  if (b < 2) throw std::invalid_argument("lebesgue: base must be >= 2");
  return ProductMeasure{std::vector<double>(b, 1.0 / b)};
}

/// Indices with positive first-digit probability.
inline std::vector<int> mu_valid_indices(const ProductMeasure& m) {
  std::vector<int> out;
  for (int i = 0; i < m.size(); ++i)
    if (m.p[i] > 0.0) out.push_back(i);
  return out;
}

}  // namespace cantordim
