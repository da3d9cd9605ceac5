#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixlab/skew_product.hpp"

namespace mixlab {

struct SolenoidParameters {
  int degree = 2;             ///< base map theta -> degree * theta mod 1
  double contraction = 20.0;  ///< c > 1, fiber map z/c + rho (cos 2 pi theta, sin 2 pi theta)
  double offset = 0.25;       ///< rho
  double fiber_radius = 1.0;  ///< R
};

/// Solid-torus solenoid as a skew product over the circle expansion.
struct SolenoidModel {
  SolenoidParameters params;
  SkewPtr skew;

  double kappa() const { return 1.0 / params.contraction; }
  /// R/c + rho, the radius the fiber image never exceeds.
  double image_radius() const { return params.fiber_radius / params.contraction + params.offset; }
};

/// Throws GeometryViolation naming the failed inequality:
/// invariance R/c + rho <= R, injectivity 2 rho sin(pi/d) > 2R/c.
SolenoidModel build_solenoid(const SolenoidParameters& params);

struct DominationReport {
  double fiber_norm = 0.0;     ///< ||DF|_E^s|| = 1/c
  double full_norm_sq = 0.0;   ///< upper bound of ||DF||^2 (Frobenius) over all theta
  double product = 0.0;        ///< fiber_norm * full_norm_sq
  std::size_t probes = 0;
  bool pass = false;           ///< product < 1
  std::string note;
};

/// Return-map analogue of the domination condition, enclosed by interval
/// arithmetic over `probes` subintervals covering the circle.
DominationReport check_domination(const SolenoidModel& model, std::size_t probes = 65536);

/// Random initial points pushed burn_in times by F^; per-point seeds.
std::vector<SkewPoint> attractor_sample(const SolenoidModel& model, std::size_t n, int burn_in, std::uint64_t seed);

}  // namespace mixlab
