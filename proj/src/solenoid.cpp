#include "mixlab/solenoid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "mixlab/interval.hpp"
#include "mixlab/parallel.hpp"
#include "mixlab/random.hpp"

namespace mixlab {

SolenoidModel build_solenoid(const SolenoidParameters& p) {
  if (p.degree < 2) throw GeometryViolation("solenoid: degree must be >= 2");
  if (!(p.contraction > 1.0)) throw GeometryViolation("solenoid: contraction c must exceed 1");
  if (!(p.offset > 0.0 && p.offset < 1.0)) throw GeometryViolation("solenoid: offset rho must lie in (0,1)");
  if (!(p.fiber_radius > 0.0)) throw GeometryViolation("solenoid: fiber radius must be positive");
  const double image = p.fiber_radius / p.contraction + p.offset;
  if (image > p.fiber_radius) {
    std::ostringstream msg;
    msg << "solenoid invariance violated: R/c + rho = " << image << " > R = " << p.fiber_radius;
    throw GeometryViolation(msg.str());
  }
  const double separation = 2.0 * p.offset * std::sin(std::numbers::pi / p.degree);
  const double diameter = 2.0 * p.fiber_radius / p.contraction;
  if (!(separation > diameter)) {
    std::ostringstream msg;
    msg << "solenoid injectivity violated: 2 rho sin(pi/d) = " << separation << " <= 2R/c = " << diameter;
    throw GeometryViolation(msg.str());
  }

  auto base = std::make_shared<const ExpandingMarkovMap>(models::circle_expansion(p.degree));
  FiberBall ball{FiberPoint::Zero(2), p.fiber_radius};
  const FiberMatrix linear = FiberMatrix::Identity(2, 2) / p.contraction;
  const double rho = p.offset;
  auto offset = [rho](std::size_t, double theta) -> FiberPoint {
    FiberPoint o(2);
    o << rho * std::cos(2.0 * std::numbers::pi * theta), rho * std::sin(2.0 * std::numbers::pi * theta);
    return o;
  };
  SolenoidModel model{p, std::make_shared<const HyperbolicSkewProduct>(HyperbolicSkewProduct::affine(
                             base, ball, linear, offset, 1.0 / p.contraction))};
  const auto check = validate_contraction(*model.skew, 2000);
  if (!check.invariance) throw GeometryViolation("solenoid: fiber image escapes the disk at a probe point");
  return model;
}

DominationReport check_domination(const SolenoidModel& model, std::size_t probes) {
  if (probes == 0) throw std::invalid_argument("check_domination: probes must be >= 1");
  const auto& p = model.params;
  const Interval inv_c = Interval::widen(Interval::point(1.0 / p.contraction));
  const Interval d = Interval::point(static_cast<double>(p.degree));
  const Interval amp = Interval::widen(Interval::point(2.0 * std::numbers::pi * p.offset));

  // DF = [[d, 0, 0], [-2 pi rho sin, 1/c, 0], [2 pi rho cos, 0, 1/c]].
  double worst = 0.0;
  for (std::size_t i = 0; i < probes; ++i) {
    const Interval theta{static_cast<double>(i) / probes, static_cast<double>(i + 1) / probes};
    const Interval s = amp * sin_turns(theta);
    const Interval c = amp * cos_turns(theta);
    const Interval frob = square(d) + square(s) + square(c) + square(inv_c) + square(inv_c);
    worst = std::max(worst, frob.hi);
  }
  DominationReport rep;
  rep.fiber_norm = inv_c.hi;
  rep.full_norm_sq = worst;
  rep.product = (Interval{inv_c.lo, inv_c.hi} * Interval{worst, worst}).hi;
  rep.probes = probes;
  rep.pass = rep.product < 1.0;
  rep.note = "checked on the return map F^ (time-one flow derivative replaced by the base return), "
             "||DF^|| bounded by the Frobenius norm of the 3x3 derivative";
  return rep;
}

std::vector<SkewPoint> attractor_sample(const SolenoidModel& model, std::size_t n, int burn_in, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("attractor_sample: n must be >= 1");
  if (burn_in < 0) throw std::invalid_argument("attractor_sample: burn_in must be >= 0");
  const auto& skew = *model.skew;
  const int d = model.params.degree;
  std::vector<SkewPoint> out(n);
  parallel_for(n, [&](std::size_t i) {
    Rng rng(stream_seed(seed, i));
    SkewPoint w{rng.uniform(), FiberPoint(2)};
    do {
      w.z << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
    } while (w.z.squaredNorm() > 1.0);
    w.z *= model.params.fiber_radius;
    for (int t = 0; t < burn_in; ++t) {
      // The fiber map is continuous in theta, so the branch label is immaterial.
      const double scaled = d * w.x;
      const auto k = static_cast<std::size_t>(std::min<double>(std::floor(scaled), d - 1));
      w.z = skew.fiber(k, w.x, w.z);
      w.x = scaled - std::floor(scaled);
    }
    out[i] = std::move(w);
  });
  return out;
}

}  // namespace mixlab
