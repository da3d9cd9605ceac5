#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "mixlab/random.hpp"
#include "mixlab/roof.hpp"
#include "mixlab/skew_product.hpp"
#include "mixlab/transfer_operator.hpp"

namespace mixlab {

/// (x, u) with 0 <= u < r(x); z is empty over a map base.
struct PhasePoint {
  double x = 0.0;
  double u = 0.0;
  FiberPoint z;
};

using PhaseObservable = std::function<double(const PhasePoint&)>;

/// Suspension of a Markov map (measure nu) or of a skew product (measure eta)
/// under a roof that is constant along fibers.
class SuspensionSemiflow {
 public:
  /// Map base. The density is the acim of the roof's base map.
  SuspensionSemiflow(RoofFunction roof, std::shared_ptr<const InvariantDensity> density);
  /// Skew base over the same map as the roof; fibers are drawn by pushing the
  /// origin forward along a random `fiber_depth`-step inverse path.
  SuspensionSemiflow(RoofFunction roof, SkewPtr skew, std::shared_ptr<const InvariantDensity> density,
                     int fiber_depth = 30);

  const RoofFunction& roof() const { return roof_; }
  const ExpandingMarkovMap& base() const { return roof_.base(); }
  const InvariantDensity& density() const { return *density_; }
  bool has_skew() const { return skew_ != nullptr; }
  const HyperbolicSkewProduct& skew() const { return *skew_; }
  /// nu(r) = eta(r).
  double mean_roof() const { return mean_roof_; }

  /// Advances by t >= 0, applying the base map at each roof crossing.
  /// With `refresh`, each landing point gets a jitter of 2^-49 of the domain
  /// so floating-point orbits of affine maps stay generic.
  PhasePoint flow_to(PhasePoint p, double t, Rng* refresh = nullptr) const;

  /// Draws from (nu x Leb)/nu(r) restricted to u < r(x): x from the density's
  /// inverse CDF, accepted with probability r(x)/sup r, then u uniform.
  std::vector<PhasePoint> sample_invariant(std::size_t n, std::uint64_t seed) const;
  PhasePoint sample_one(Rng& rng) const;

 private:
  RoofFunction roof_;
  SkewPtr skew_;
  std::shared_ptr<const InvariantDensity> density_;
  int fiber_depth_ = 0;
  double mean_roof_ = 0.0;
};

struct TimeGrid {
  double t0 = 0.0;
  double dt = 0.1;
  double t_max = 1.0;

  std::size_t size() const;
  double at(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
};

struct CorrelationSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> std_errors;
  std::size_t sample_count = 0;
  std::size_t batches = 0;
};

struct CorrelationOptions {
  std::size_t samples = 100000;
  std::size_t batches = 100;   ///< batch b draws from stream_seed(seed, b)
  std::uint64_t seed = 42;
};

/// rho(t) = E[phi o F_t . psi] - E[phi o F_t] E[psi] over invariant samples,
/// with batch-means standard errors.
CorrelationSeries correlation(const SuspensionSemiflow& susp, const PhaseObservable& phi, const PhaseObservable& psi,
                              const TimeGrid& grid, const CorrelationOptions& options);

/// cos(2 pi u / rbar) (1 + x).
PhaseObservable default_observable(const SuspensionSemiflow& susp);

enum class DecayVerdict { Decay, NoDecay };

struct RateFit {
  DecayVerdict verdict = DecayVerdict::NoDecay;
  double decay_rate = 0.0;  ///< gamma = -slope
  double prefactor = 0.0;   ///< C = exp(intercept)
  double r_squared = 0.0;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  ///< 95% interval of the slope
  double window_lo = 0.0, window_hi = 0.0;
  double noise_floor = 0.0;
  std::size_t points = 0;
};

/// OLS of log|rho| on t over the points above k * max(std_errors) inside the
/// window [first point, last point above the floor]. A finite `gap` ends the
/// window earlier, at the first below-floor stretch longer than `gap`.
/// NoDecay when the slope's 95% interval contains 0 or the slope is not
/// negative. Throws WindowTooShort below 8 usable points.
RateFit fit_rate(const CorrelationSeries& series, double noise_floor_mult = 3.0,
                 double gap = std::numeric_limits<double>::infinity());

/// Two-sided 97.5% Student-t quantile (Cornish-Fisher expansion).
double student_t_975(double dof);

// ---------------------------------------------------------------------------
// Temporal distance

/// Past coding: inverse branches applied in order, first entry first.
struct PastCoding {
  Itinerary branches;
};

/// Admissible pasts for points of cell `cell` that follow the Thue-Morse
/// pattern (and its complement) among the allowed branch choices.
std::pair<PastCoding, PastCoding> contrasting_pasts(const ExpandingMarkovMap& map, std::size_t cell, int depth);

struct TemporalDistance {
  double value = 0.0;
  double truncation_bound = 0.0;  ///< 2 K lambda^n |x - y| / (1 - lambda)
};

/// sum_{j=1..n} [r(h_a^j x) - r(h_a^j y) - r(h_b^j x) + r(h_b^j y)]: the flow
/// time separating the two brackets of x, y built from pasts a and b.
/// Throws BracketUndefined if x and y lie in different cells.
TemporalDistance temporal_distance(const RoofFunction& roof, double x, double y, const PastCoding& a,
                                   const PastCoding& b, int depth);

struct TemporalDistanceGrid {
  std::vector<double> points;
  Eigen::MatrixXd values;
  double max_abs = 0.0;
  double truncation_bound = 0.0;
};

/// All pairs of the points lo + (i + 1/2) |cell| / side, i < side, of one cell.
TemporalDistanceGrid temporal_distance_grid(const RoofFunction& roof, std::size_t cell, std::size_t side, int depth);

}  // namespace mixlab
