#include "cantordim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cantordim/errors.hpp"
#include "cantordim/parallel.hpp"
#include "cantordim/rng.hpp"

namespace cantordim {

McEstimate mc_lyapunov(const TransferMatrices& tm, const ProductMeasure& mu, long long steps,
                       int trials, std::uint64_t seed) {
  mu.validate();
  if (mu.size() != tm.b) throw std::invalid_argument("measure size must match base");
  if (steps < 10000) throw std::invalid_argument("mc_lyapunov: steps must be >= 10^4");
  if (trials < 1) throw std::invalid_argument("mc_lyapunov: trials must be >= 1");

  std::vector<double> cdf(mu.p.size());
  double run = 0.0;
  for (std::size_t i = 0; i < mu.p.size(); ++i) {
    run += mu.p[i];
    cdf[i] = run;
  }
  cdf.back() = 1.0;

  std::vector<double> per_trial(static_cast<std::size_t>(trials), 0.0);
  std::vector<char> failed(static_cast<std::size_t>(trials), 0);
  parallel_for(0, trials, [&](long long tr) {
    CounterRng rng(seed, static_cast<std::uint64_t>(tr) + 1);
    double v0 = 0.5, v1 = 0.5;
    double acc = 0.0;
    for (long long s = 0; s < steps; ++s) {
      const double u = rng.uniform();
      // upper_bound keeps zero-weight digits unreachable (u == cdf boundary).
      const std::size_t d = static_cast<std::size_t>(
          std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      const Mat2& A = tm.mats[d];
      const double w0 = v0 * A(0, 0) + v1 * A(1, 0);
      const double w1 = v0 * A(0, 1) + v1 * A(1, 1);
      const double norm = w0 + w1;
      if (norm <= 0.0) {
        failed[static_cast<std::size_t>(tr)] = 1;
        return;
      }
      acc += std::log(norm);
      v0 = w0 / norm;
      v1 = w1 / norm;
    }
    per_trial[static_cast<std::size_t>(tr)] = acc / static_cast<double>(steps);
  });
  for (char f : failed)
    if (f)
      throw CantorError(ErrorKind::ZeroProduct, "running vector annihilated by a zero-row product");

  McEstimate out;
  for (double v : per_trial) out.estimate += v;
  out.estimate /= trials;
  if (trials > 1) {
    double ss = 0.0;
    for (double v : per_trial) ss += (v - out.estimate) * (v - out.estimate);
    out.standard_error = std::sqrt(ss / (static_cast<double>(trials) * (trials - 1)));
  }
  return out;
}

double GridMeasure::total() const {
  double s = 0.0;
  for (double m : mass) s += m;
  return s;
}

double GridMeasure::integrate(const std::function<double(double)>& f) const {
  double s = 0.0;
  for (int c = 0; c < cells(); ++c)
    if (mass[static_cast<std::size_t>(c)] != 0.0) s += mass[static_cast<std::size_t>(c)] * f(cell_mid(c));
  return s;
}

GridMeasure grid_stationary(const IfsSystem& sys, int cells, int iters) {
  if (cells < 100) throw std::invalid_argument("grid_stationary: cells must be >= 100");
  if (iters < 0) throw std::invalid_argument("grid_stationary: iters must be >= 0");

  const double width = 2.0 / cells;
  auto cell_of = [&](double x) {
    int c = static_cast<int>(std::floor((x + 1.0) / width));
    return std::min(cells - 1, std::max(0, c));
  };

  GridMeasure nu;
  nu.mass.assign(static_cast<std::size_t>(cells), 1.0 / cells);

  std::vector<double> next(static_cast<std::size_t>(cells));
  for (int it = 0; it < iters; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int i : sys.valid) {
      const InducedMap& f = sys.maps[static_cast<std::size_t>(i)];
      const double p = sys.prob(i);
      if (f.constant()) {
        next[static_cast<std::size_t>(cell_of(f.value))] += p;  // total mass is 1
        continue;
      }
      for (int c = 0; c < cells; ++c) {
        const double m = nu.mass[static_cast<std::size_t>(c)];
        if (m == 0.0) continue;
        const double xl = -1.0 + c * width, xr = xl + width;
        double y1 = f.map(xl), y2 = f.map(xr);
        if (y1 > y2) std::swap(y1, y2);
        y1 = std::max(-1.0, y1);
        y2 = std::min(1.0, y2);
        const double img = y2 - y1;
        if (img <= 1e-300) {
          next[static_cast<std::size_t>(cell_of(0.5 * (y1 + y2)))] += p * m;
          continue;
        }
        const int c1 = cell_of(y1), c2 = cell_of(y2);
        for (int cc = c1; cc <= c2; ++cc) {
          const double el = -1.0 + cc * width, er = el + width;
          const double overlap = std::min(er, y2) - std::max(el, y1);
          if (overlap > 0.0) next[static_cast<std::size_t>(cc)] += p * m * (overlap / img);
        }
      }
    }
    nu.mass.swap(next);
  }
  return nu;
}

double dim_from_lambda(double lambda, int b) {
  if (b < 2) throw std::invalid_argument("dim_from_lambda: base must be >= 2");
  return lambda / std::log(static_cast<double>(b));
}

bool uniqueness_conditions_hold(const TransferMatrices& tm, const ProductMeasure& mu) {
  for (int i = 0; i < tm.b; ++i) {
    if (mu.p[static_cast<std::size_t>(i)] <= 0.0) continue;
    const Mat2& m = tm.mats[static_cast<std::size_t>(i)];
    if (m.det() == 0) return true;  // rank one
    bool positive = true;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        long long sq = m(r, 0) * m(0, c) + m(r, 1) * m(1, c);
        if (sq <= 0) positive = false;
      }
    if (positive) return true;  // primitive
  }
  return false;
}

}  // namespace cantordim
