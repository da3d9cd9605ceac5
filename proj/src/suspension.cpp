#include "mixlab/suspension.hpp"

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <numbers>

#include "mixlab/parallel.hpp"

namespace mixlab {

SuspensionSemiflow::SuspensionSemiflow(RoofFunction roof, std::shared_ptr<const InvariantDensity> density)
    : roof_(std::move(roof)), density_(std::move(density)) {
  if (!density_) throw std::invalid_argument("suspension: an invariant density is required");
  mean_roof_ = density_->integrate([this](double x) { return roof_(x); });
}

SuspensionSemiflow::SuspensionSemiflow(RoofFunction roof, SkewPtr skew, std::shared_ptr<const InvariantDensity> density,
                                       int fiber_depth)
    : SuspensionSemiflow(std::move(roof), std::move(density)) {
  if (!skew) throw std::invalid_argument("suspension: null skew product");
  if (skew->base_ptr() != roof_.base_ptr() && skew->base().name() != roof_.base().name())
    throw ModelError("suspension: roof and skew product live over different base maps");
  if (fiber_depth < 1) throw std::invalid_argument("suspension: fiber depth must be >= 1");
  skew_ = std::move(skew);
  fiber_depth_ = fiber_depth;
}

PhasePoint SuspensionSemiflow::flow_to(PhasePoint p, double t, Rng* refresh) const {
  if (!(t >= 0.0)) throw std::invalid_argument("flow_to: time must be non-negative");
  const auto& map = base();
  const Cell dom = map.domain();
  p.u += t;
  for (;;) {
    const std::size_t k = map.locate(p.x);
    const double r = roof_.on_branch(k, p.x);
    if (p.u < r) return p;
    p.u -= r;
    if (skew_) p.z = skew_->fiber(k, p.x, p.z);
    double next = map.forward(k, p.x);
    if (refresh) {
      // Floating-point affine orbits lose a bit per step; fresh low-order
      // bits keep them generic. The perturbation is far below any resolution.
      for (;;) {
        double y = next + (refresh->uniform() - 0.5) * 0x1.0p-49 * dom.length();
        if (y < dom.lo) y += dom.length();
        if (y >= dom.hi) y -= dom.length();
        try {
          map.locate(y);
          next = y;
          break;
        } catch (const BoundaryPoint&) {
        }
      }
    }
    p.x = std::min(std::max(next, dom.lo), std::nextafter(dom.hi, dom.lo));
  }
}

PhasePoint SuspensionSemiflow::sample_one(Rng& rng) const {
  const double top = roof_.upper_bound();
  const auto& map = base();
  for (;;) {
    const double x = density_->quantile(rng.uniform());
    std::size_t k;
    try {
      k = map.locate(x);
    } catch (const BoundaryPoint&) {
      continue;
    }
    const double r = roof_.on_branch(k, x);
    if (rng.uniform() * top >= r) continue;
    PhasePoint p{x, rng.uniform() * r, {}};
    if (skew_) {
      // Random inverse path with transfer weights, then push the origin forward.
      std::vector<std::pair<std::size_t, double>> path;
      double y = x;
      const Cell dom = map.domain();
      for (int level = 0; level < fiber_depth_; ++level) {
        std::vector<std::pair<std::size_t, double>> options;
        std::vector<double> weights;
        for (std::size_t j = 0; j < map.size(); ++j) {
          const Cell img = map.image(j);
          if (!((y >= img.lo && y < img.hi) || (y == img.hi && img.hi == dom.hi))) continue;
          const double pre = map.inverse(j, y);
          options.emplace_back(j, pre);
          weights.push_back(density_->value_at(pre) / std::abs(map.derivative(j, pre)));
        }
        double total = 0.0;
        for (double w : weights) total += w;
        double pick = rng.uniform() * total;
        std::size_t choice = 0;
        while (choice + 1 < weights.size() && pick >= weights[choice]) pick -= weights[choice++];
        path.push_back(options[choice]);
        y = options[choice].second;
      }
      FiberPoint z = skew_->origin();
      for (auto it = path.rbegin(); it != path.rend(); ++it) z = skew_->fiber(it->first, it->second, z);
      p.z = std::move(z);
    }
    return p;
  }
}

std::vector<PhasePoint> SuspensionSemiflow::sample_invariant(std::size_t n, std::uint64_t seed) const {
  constexpr std::size_t block = 4096;
  const std::size_t blocks = (n + block - 1) / block;
  std::vector<PhasePoint> out(n);
  parallel_for(blocks, [&](std::size_t b) {
    Rng rng(stream_seed(seed, b));
    for (std::size_t i = b * block; i < std::min(n, (b + 1) * block); ++i) out[i] = sample_one(rng);
  });
  return out;
}

std::size_t TimeGrid::size() const {
  if (!(dt > 0.0) || t_max < t0) throw std::invalid_argument("time grid: need dt > 0 and t_max >= t0");
  return static_cast<std::size_t>(std::floor((t_max - t0) / dt + 1e-9)) + 1;
}

PhaseObservable default_observable(const SuspensionSemiflow& susp) {
  const double rbar = susp.mean_roof();
  return [rbar](const PhasePoint& p) { return std::cos(2.0 * std::numbers::pi * p.u / rbar) * (1.0 + p.x); };
}

CorrelationSeries correlation(const SuspensionSemiflow& susp, const PhaseObservable& phi, const PhaseObservable& psi,
                              const TimeGrid& grid, const CorrelationOptions& options) {
  if (options.batches < 2) throw std::invalid_argument("correlation: need at least 2 batches");
  if (options.samples < options.batches) throw std::invalid_argument("correlation: fewer samples than batches");
  const std::size_t m = grid.size();
  const std::size_t nb = options.batches;

  struct Batch {
    std::vector<double> phi, phipsi;
    double psi = 0.0;
    std::size_t count = 0;
  };
  std::vector<Batch> batches(nb);
  parallel_for(nb, [&](std::size_t b) {
    Batch& acc = batches[b];
    acc.phi.assign(m, 0.0);
    acc.phipsi.assign(m, 0.0);
    acc.count = options.samples / nb + (b < options.samples % nb ? 1 : 0);
    Rng rng(stream_seed(options.seed, b));
    for (std::size_t s = 0; s < acc.count; ++s) {
      PhasePoint p = susp.sample_one(rng);
      const double psi0 = psi(p);
      acc.psi += psi0;
      double now = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double t = grid.at(k);
        p = susp.flow_to(p, t - now, &rng);
        now = t;
        const double v = phi(p);
        acc.phi[k] += v;
        acc.phipsi[k] += v * psi0;
      }
    }
  });

  CorrelationSeries out;
  out.sample_count = options.samples;
  out.batches = nb;
  std::vector<double> sum_phi(m, 0.0), sum_phipsi(m, 0.0);
  double sum_psi = 0.0;
  for (const auto& b : batches) {
    for (std::size_t k = 0; k < m; ++k) {
      sum_phi[k] += b.phi[k];
      sum_phipsi[k] += b.phipsi[k];
    }
    sum_psi += b.psi;
  }
  const double n = static_cast<double>(options.samples);
  for (std::size_t k = 0; k < m; ++k) {
    out.times.push_back(grid.at(k));
    out.values.push_back(sum_phipsi[k] / n - (sum_phi[k] / n) * (sum_psi / n));
    double mean = 0.0, sq = 0.0;
    for (const auto& b : batches) {
      const double c = static_cast<double>(b.count);
      const double rho = b.phipsi[k] / c - (b.phi[k] / c) * (b.psi / c);
      mean += rho;
      sq += rho * rho;
    }
    mean /= static_cast<double>(nb);
    const double var = std::max(0.0, (sq / static_cast<double>(nb) - mean * mean)) * static_cast<double>(nb) /
                       static_cast<double>(nb - 1);
    out.std_errors.push_back(std::sqrt(var / static_cast<double>(nb)));
  }
  return out;
}

double student_t_975(double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("student_t_975: dof must be positive");
  constexpr double z = 1.959963984540054;
  const double z2 = z * z, z3 = z2 * z, z5 = z3 * z2, z7 = z5 * z2, z9 = z7 * z2;
  const double n = dof;
  return z + (z3 + z) / (4 * n) + (5 * z5 + 16 * z3 + 3 * z) / (96 * n * n) +
         (3 * z7 + 19 * z5 + 17 * z3 - 15 * z) / (384 * n * n * n) +
         (79 * z9 + 776 * z7 + 1482 * z5 - 1920 * z3 - 945 * z) / (92160 * n * n * n * n);
}

RateFit fit_rate(const CorrelationSeries& series, double noise_floor_mult, double gap) {
  const std::size_t m = series.values.size();
  if (series.times.size() != m || series.std_errors.size() != m)
    throw std::invalid_argument("fit_rate: series columns differ in length");
  RateFit fit;
  double max_err = 0.0;
  for (double e : series.std_errors) max_err = std::max(max_err, e);
  fit.noise_floor = noise_floor_mult * max_err;
  auto above = [&](std::size_t k) { return std::abs(series.values[k]) > fit.noise_floor && series.values[k] != 0.0; };

  // Window end: last point above the floor before a below-floor stretch
  // longer than `gap`.
  std::size_t last = m;
  double quiet_since = -1.0;
  for (std::size_t k = 0; k < m; ++k) {
    if (above(k)) {
      last = k;
      quiet_since = -1.0;
    } else {
      if (quiet_since < 0.0) quiet_since = series.times[k];
      if (last != m && series.times[k] - quiet_since > gap) break;
    }
  }
  std::vector<std::size_t> used;
  if (last != m)
    for (std::size_t k = 0; k <= last; ++k)
      if (above(k)) used.push_back(k);
  if (used.size() < 8)
    throw WindowTooShort("fit_rate: " + std::to_string(used.size()) + " points above the noise floor " +
                         std::to_string(fit.noise_floor) + ", need 8");

  const auto n = static_cast<Eigen::Index>(used.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = series.times[used[static_cast<std::size_t>(i)]];
    y(i) = std::log(std::abs(series.values[used[static_cast<std::size_t>(i)]]));
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd resid = y - design * coef;
  const double ssr = resid.squaredNorm();
  const double sst = (y.array() - y.mean()).square().sum();
  const double tmean = design.col(1).mean();
  const double sxx = (design.col(1).array() - tmean).square().sum();

  fit.points = used.size();
  fit.window_lo = series.times[used.front()];
  fit.window_hi = series.times[used.back()];
  fit.slope = coef(1);
  fit.prefactor = std::exp(coef(0));
  fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : 0.0;
  fit.slope_stderr = sxx > 0.0 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
  const double q = student_t_975(static_cast<double>(n - 2));
  fit.ci_lo = fit.slope - q * fit.slope_stderr;
  fit.ci_hi = fit.slope + q * fit.slope_stderr;
  const bool decays = fit.slope < 0.0 && fit.ci_hi < 0.0;
  fit.verdict = decays ? DecayVerdict::Decay : DecayVerdict::NoDecay;
  fit.decay_rate = decays ? -fit.slope : 0.0;
  return fit;
}

// ---------------------------------------------------------------------------
// Temporal distance

std::pair<PastCoding, PastCoding> contrasting_pasts(const ExpandingMarkovMap& map, std::size_t cell, int depth) {
  if (depth < 1) throw std::invalid_argument("contrasting_pasts: depth must be >= 1");
  PastCoding a, b;
  auto extend = [&](PastCoding& past, bool complement) {
    std::size_t current = cell;
    for (int j = 0; j < depth; ++j) {
      std::vector<int> allowed;
      for (std::size_t k = 0; k < map.size(); ++k)
        if (map.allowed(k, current)) allowed.push_back(static_cast<int>(k));
      if (allowed.empty()) throw BracketUndefined("cell " + std::to_string(current) + " has no preimage branch");
      // Thue-Morse bit of j picks the smallest or largest allowed branch.
      const bool bit = (std::popcount(static_cast<unsigned>(j)) % 2 == 1) != complement;
      const int k = bit ? allowed.back() : allowed.front();
      past.branches.push_back(k);
      current = static_cast<std::size_t>(k);
    }
  };
  extend(a, false);
  extend(b, true);
  return {a, b};
}

TemporalDistance temporal_distance(const RoofFunction& roof, double x, double y, const PastCoding& a,
                                   const PastCoding& b, int depth) {
  if (depth < 1) throw std::invalid_argument("temporal_distance: depth must be >= 1");
  if (a.branches.size() < static_cast<std::size_t>(depth) || b.branches.size() < static_cast<std::size_t>(depth))
    throw std::invalid_argument("temporal_distance: past codings shorter than the depth");
  const auto& map = roof.base();
  const std::size_t cx = map.locate(x), cy = map.locate(y);
  if (cx != cy)
    throw BracketUndefined("points " + std::to_string(x) + " and " + std::to_string(y) +
                           " lie in different cells, no common product chart");

  // Sum along one past of r(h^j x) - r(h^j y).
  auto along = [&](const PastCoding& past) {
    double px = x, py = y, sum = 0.0;
    std::size_t current = cx;
    for (int j = 0; j < depth; ++j) {
      const auto k = static_cast<std::size_t>(past.branches[static_cast<std::size_t>(j)]);
      if (!map.allowed(k, current))
        throw BracketUndefined("past coding is not admissible at step " + std::to_string(j + 1));
      px = map.inverse(k, px);
      py = map.inverse(k, py);
      sum += roof.on_branch(k, px) - roof.on_branch(k, py);
      current = k;
    }
    return sum;
  };
  TemporalDistance out;
  out.value = along(a) - along(b);
  const double lambda = map.expansion_bound();
  out.truncation_bound =
      2.0 * roof.branch_lipschitz() * std::pow(lambda, depth) * std::abs(x - y) / (1.0 - lambda);
  return out;
}

TemporalDistanceGrid temporal_distance_grid(const RoofFunction& roof, std::size_t cell, std::size_t side, int depth) {
  if (side == 0) throw std::invalid_argument("temporal_distance_grid: side must be >= 1");
  const auto& map = roof.base();
  const Cell c = map.cell(cell);
  const auto [a, b] = contrasting_pasts(map, cell, depth);
  TemporalDistanceGrid g;
  for (std::size_t i = 0; i < side; ++i)
    g.points.push_back(c.lo + (static_cast<double>(i) + 0.5) * c.length() / static_cast<double>(side));
  const auto s = static_cast<Eigen::Index>(side);
  g.values.resize(s, s);
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j < s; ++j) {
      const auto td = temporal_distance(roof, g.points[static_cast<std::size_t>(i)],
                                        g.points[static_cast<std::size_t>(j)], a, b, depth);
      g.values(i, j) = td.value;
      g.max_abs = std::max(g.max_abs, std::abs(td.value));
      g.truncation_bound = std::max(g.truncation_bound, td.truncation_bound);
    }
  return g;
}

}  // namespace mixlab
