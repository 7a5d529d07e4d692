#include "cantordim/degenerate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include "cantordim/errors.hpp"

namespace cantordim {

namespace {

double clamp11(double x) { return std::min(1.0, std::max(-1.0, x)); }

std::int64_t quantize(double x, double tol) {
  return static_cast<std::int64_t>(std::llround(x / tol));
}

}  // namespace

std::pair<double, double> orbit_hull(const IfsSystem& sys, double alpha) {
  double lo = clamp11(alpha), hi = lo;
  for (int it = 0; it < 500; ++it) {
    double nlo = lo, nhi = hi;
    for (int i : sys.valid) {
      const InducedMap& f = sys.maps[static_cast<std::size_t>(i)];
      if (f.constant()) {
        nlo = std::min(nlo, f.value);
        nhi = std::max(nhi, f.value);
      } else {
        auto [ilo, ihi] = image_interval(f.map, lo, hi);
        nlo = std::min(nlo, ilo);
        nhi = std::max(nhi, ihi);
      }
    }
    nlo = clamp11(nlo);
    nhi = clamp11(nhi);
    if (nlo >= lo - 1e-12 && nhi <= hi + 1e-12) return {nlo, nhi};
    lo = nlo;
    hi = nhi;
  }
  return {lo, hi};
}

namespace {

// Lazy sorted stream: the images of the (sorted) level atoms under one map.
// A Moebius map with pole outside the interval is monotone, so the images
// arrive sorted; decreasing maps are walked backwards. Constant maps emit a
// single pooled atom.
struct ImageStream {
  const OrbitMeasure* level;
  const InducedMap* map;
  double prob;
  bool increasing;
  std::size_t pos = 0;
  bool constant_done = false;

  bool exhausted() const {
    if (map->constant()) return constant_done;
    return pos >= level->atoms.size();
  }
  std::pair<double, double> head(double level_total) const {
    if (map->constant()) return {map->value, prob * level_total};
    const std::size_t n = level->atoms.size();
    const auto& a = level->atoms[increasing ? pos : n - 1 - pos];
    return {clamp11(map->apply(a.first)), prob * a.second};
  }
  void advance() {
    if (map->constant()) constant_done = true;
    else ++pos;
  }
};

}  // namespace

OrbitMeasure propagate_level(const IfsSystem& sys, int j, const OrbitMeasure& level,
                             const DegenerateOptions& opts, double* pruned_out) {
  OrbitMeasure next;
  next.dropped_mass = level.dropped_mass * (1.0 - sys.prob(j));
  const double level_total = level.total_weight();

  std::vector<ImageStream> streams;
  for (int i : sys.valid) {
    if (i == j) continue;
    const InducedMap& f = sys.maps[static_cast<std::size_t>(i)];
    ImageStream s;
    s.level = &level;
    s.map = &f;
    s.prob = sys.prob(i);
    s.increasing = f.constant() || f.map.det() > 0.0;
    streams.push_back(s);
  }

  // k-way merge by quantized key, ties broken by stream index so the
  // summation order is reproducible.
  using HeapItem = std::pair<std::int64_t, std::size_t>;  // (key, stream)
  auto cmp = [](const HeapItem& a, const HeapItem& b) { return a > b; };
  std::priority_queue<HeapItem, std::vector<HeapItem>, decltype(cmp)> heap(cmp);
  auto push_head = [&](std::size_t s) {
    if (!streams[s].exhausted())
      heap.emplace(quantize(streams[s].head(level_total).first, opts.merge_tol), s);
  };
  for (std::size_t s = 0; s < streams.size(); ++s) push_head(s);

  double pruned = 0.0;
  bool have_open = false;
  std::int64_t open_key = 0;
  double open_x = 0.0, open_w = 0.0;
  auto close_open = [&] {
    if (!have_open) return;
    if (open_w < opts.prune_tol) pruned += open_w;
    else next.atoms.emplace_back(open_x, open_w);
    have_open = false;
  };
  while (!heap.empty()) {
    auto [key, s] = heap.top();
    heap.pop();
    auto [x, w] = streams[s].head(level_total);
    streams[s].advance();
    push_head(s);
    if (have_open && key == open_key) {
      open_w += w;
    } else {
      close_open();
      have_open = true;
      open_key = key;
      open_x = x;
      open_w = w;
    }
  }
  close_open();

  // Atom-count cap: keep the heaviest, drop the rest into the bound.
  if (next.atoms.size() > opts.max_atoms) {
    std::vector<std::pair<double, std::size_t>> order;  // (weight, position)
    order.reserve(next.atoms.size());
    for (std::size_t k = 0; k < next.atoms.size(); ++k)
      order.emplace_back(next.atoms[k].second, k);
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(opts.max_atoms),
                     order.end(), std::greater<>());
    std::vector<char> keep(next.atoms.size(), 0);
    for (std::size_t k = 0; k < opts.max_atoms; ++k) keep[order[k].second] = 1;
    std::vector<std::pair<double, double>> kept;
    kept.reserve(opts.max_atoms);
    for (std::size_t k = 0; k < next.atoms.size(); ++k) {
      if (keep[k]) kept.push_back(next.atoms[k]);
      else pruned += next.atoms[k].second;
    }
    next.atoms.swap(kept);
  }

  next.dropped_mass += pruned;
  if (pruned_out) *pruned_out += pruned;
  return next;
}

namespace {

struct Propagation {
  double lambda_sum = 0.0;    // sum over levels of sum_atoms w * G(x)
  double pruned_total = 0.0;  // raw pruned mass, undecayed
  std::size_t peak_atoms = 0;
  bool capped = false;
};

Propagation propagate(const IfsSystem& sys, int j, double alpha, long long level_count,
                      const DegenerateOptions& opts) {
  Propagation out;
  OrbitMeasure level;
  level.atoms.emplace_back(alpha, 1.0);

  // G(x) = sum_k p_k log((delta_k + gamma_k x)/2); for uniform weights the
  // logs pool into one call per atom.
  bool uniform = sys.valid.size() <= 50;  // pooled product stays far from overflow
  for (int k : sys.valid)
    if (sys.prob(k) != sys.prob(sys.valid.front())) uniform = false;
  std::vector<std::pair<double, double>> gd;  // (gamma/2, delta/2) per valid index
  for (int k : sys.valid) {
    const InducedMap& f = sys.maps[static_cast<std::size_t>(k)];
    gd.emplace_back(0.5 * f.gamma, 0.5 * f.delta);
  }
  auto level_integral = [&](const OrbitMeasure& m) {
    double acc = 0.0;
    if (uniform) {
      const double p = sys.prob(sys.valid.front());
      for (const auto& atom : m.atoms) {
        double prod = 1.0;
        for (const auto& [g, d] : gd) prod *= d + g * atom.first;
        acc += atom.second * std::log(prod);
      }
      return p * acc;
    }
    for (const auto& atom : m.atoms) {
      double gx = 0.0;
      for (std::size_t k = 0; k < gd.size(); ++k)
        gx += sys.prob(sys.valid[k]) * std::log(gd[k].second + gd[k].first * atom.first);
      acc += atom.second * gx;
    }
    return acc;
  };

  for (long long lvl = 0;; ++lvl) {
    out.peak_atoms = std::max(out.peak_atoms, level.atoms.size());
    if (level.atoms.size() >= opts.max_atoms) out.capped = true;
    out.lambda_sum += level_integral(level);
    if (lvl == level_count) break;
    level = propagate_level(sys, j, level, opts, &out.pruned_total);
  }
  return out;
}

}  // namespace

LyapunovResult lyapunov_degenerate(const IfsSystem& sys, int j, double eps,
                                   const DegenerateOptions& opts) {
  if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
  if (j < 0 || j >= sys.b) throw std::invalid_argument("index j out of range");
  const InducedMap& fj = sys.maps[static_cast<std::size_t>(j)];
  if (!fj.constant())
    throw CantorError(ErrorKind::NotDegenerate, "map " + std::to_string(j) + " is not constant");
  if (sys.prob(j) <= 0.0)
    throw CantorError(ErrorKind::NotDegenerate, "index " + std::to_string(j) + " is not mu-valid");

  const double alpha = fj.value;
  const double pj = sys.prob(j);
  const double keep = 1.0 - pj;
  const auto [hull_lo, hull_hi] = orbit_hull(sys, alpha);

  // C = max over mu-valid k of sup over the hull of |log || . A_k ||_1|;
  // the integrand is monotone in x, so the endpoints decide.
  double C = 0.0;
  for (int k : sys.valid) {
    const InducedMap& f = sys.maps[static_cast<std::size_t>(k)];
    const double arg_lo = 0.5 * (f.delta + f.gamma * hull_lo);
    const double arg_hi = 0.5 * (f.delta + f.gamma * hull_hi);
    if (!(arg_lo > 0.0) || !(arg_hi > 0.0))
      throw CantorError(ErrorKind::UnboundedIntegrand,
                        "a zero row sum is reachable with weight: integrand unbounded on the hull");
    C = std::max({C, std::fabs(std::log(arg_lo)), std::fabs(std::log(arg_hi))});
  }
  if (C <= 0.0) C = 1e-300;  // integrand identically zero; keeps the bound formulas finite

  // Level count: smallest L with C * keep^{L+1} <= eps/2.
  long long L = 0;
  {
    double tail = C * keep;
    while (tail > 0.5 * eps && L < opts.max_levels) {
      tail *= keep;
      ++L;
    }
  }
  const double tail_bound = C * std::pow(keep, static_cast<double>(L + 1));

  DegenerateOptions run = opts;
  run.prune_tol = std::min(opts.prune_tol, eps / (4.0 * C * static_cast<double>(L + 1)));
  Propagation best{};
  double best_bound = std::numeric_limits<double>::infinity();
  double best_prune = run.prune_tol;
  for (int attempt = 0; attempt < 6; ++attempt) {
    Propagation prop = propagate(sys, j, alpha, L, run);
    const double bound = tail_bound + C * prop.pruned_total;
    const bool improved = bound < best_bound;
    if (improved) {
      best = prop;
      best_bound = bound;
      best_prune = run.prune_tol;
    }
    // Once the atom cap binds, lowering the prune threshold only adds
    // atoms for the cap to drop again; further attempts cannot improve.
    if (best_bound <= eps || prop.capped || !improved || run.prune_tol <= 1e-300) break;
    run.prune_tol *= 0.1;
  }

  LyapunovResult res;
  res.lambda = pj * best.lambda_sum;
  res.dimension = res.lambda / std::log(static_cast<double>(sys.b));
  res.method = Method::Degenerate;
  res.error_bound = best_bound;
  res.metadata = {
      {"j", j},
      {"alpha", alpha},
      {"levels", L},
      {"hull", {hull_lo, hull_hi}},
      {"integrand_sup", C},
      {"peak_atoms", best.peak_atoms},
      {"pruned_mass", best.pruned_total},
      {"prune_tol", best_prune},
      {"merge_tol", opts.merge_tol},
  };
  return res;
}

}  // namespace cantordim
