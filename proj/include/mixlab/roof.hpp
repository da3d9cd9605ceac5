#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mixlab/induced.hpp"
#include "mixlab/markov_map.hpp"
#include "mixlab/polynomial.hpp"
#include "mixlab/rational.hpp"

namespace mixlab {

/// One rational polynomial per branch; the representation that admits
/// exact Birkhoff sums over affine maps.
using PiecewisePolynomial = std::vector<Polynomial<Rational>>;

/// Return-time function over a Markov map.
///
/// Values are defined branch by branch (the closure of each cell), so a
/// periodic orbit that sits on a cell's closed end still has a well-defined
/// Birkhoff sum. Bounds are probe-based unless supplied.
class RoofFunction {
 public:
  using BranchValue = std::function<double(std::size_t branch, double x)>;

  RoofFunction(MapPtr base, BranchValue value, std::string description,
               std::optional<PiecewisePolynomial> exact = std::nullopt);

  static RoofFunction constant(MapPtr base, Rational c);
  /// Global polynomial, ascending coefficients.
  static RoofFunction polynomial(MapPtr base, const std::vector<Rational>& coefficients);
  static RoofFunction piecewise_polynomial(MapPtr base, const std::vector<std::vector<Rational>>& per_branch);
  static RoofFunction cellwise_constant(MapPtr base, const std::vector<Rational>& values);
  /// a0 + sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x), k = 1, 2, ...
  static RoofFunction trigonometric(MapPtr base, double a0, const std::vector<double>& cos_coeffs,
                                    const std::vector<double>& sin_coeffs);

  const ExpandingMarkovMap& base() const { return *base_; }
  const MapPtr& base_ptr() const { return base_; }
  const std::string& description() const { return description_; }

  /// r(x); locates the branch and throws BoundaryPoint on shared endpoints.
  double operator()(double x) const { return value_(base_->locate(x), x); }
  double on_branch(std::size_t k, double x) const { return value_(k, x); }

  double lower_bound() const { return lower_; }
  double upper_bound() const { return upper_; }
  /// Claimed K with |D(r o h)| <= K over inverse branches h.
  double branch_lipschitz() const { return lipschitz_; }

  /// Per-branch rational polynomials when both roof and base are exact.
  const std::optional<PiecewisePolynomial>& exact() const { return exact_; }
  bool has_exact_path() const { return exact_.has_value() && base_->exact().has_value(); }

  RoofFunction with_bounds(double lower, double upper, double lipschitz) const;
  RoofFunction relabel(std::string description) const {
    RoofFunction copy = *this;
    copy.description_ = std::move(description);
    return copy;
  }

 private:
  friend RoofFunction perturb_bump(const RoofFunction&, double, double, double, const std::vector<double>&);

  MapPtr base_;
  BranchValue value_;
  std::string description_;
  std::optional<PiecewisePolynomial> exact_;
  double lower_ = 0.0;
  double upper_ = 0.0;
  double lipschitz_ = 0.0;
};

/// Probe check of r >= r0 > 0 and of the claimed branch Lipschitz constant.
ValidationReport validate_roof(const RoofFunction& roof, std::size_t probes = 10000);

/// sum_{j<n} r(f^j x); throws BoundaryPoint if the orbit hits a shared endpoint.
double birkhoff_sum(const RoofFunction& roof, double x, int n);
Rational birkhoff_sum_exact(const RoofFunction& roof, Rational x, int n);

/// Birkhoff sum along a periodic orbit, following the itinerary's branches.
double orbit_sum(const RoofFunction& roof, const Itinerary& itinerary, double x);
Rational orbit_sum_exact(const RoofFunction& roof, const Itinerary& itinerary, const Rational& x);

/// Induced roof sum_{j<R} r(f^j x) on a first-return cell.
double induced_roof(const RoofFunction& roof, const InducedCell<double>& cell, double x);

// ---------------------------------------------------------------------------
// Cohomology

/// Aperiodic necklace representatives (Lyndon words) of length <= max_length
/// that are cyclically admissible, in lexicographic order.
std::vector<Itinerary> admissible_lyndon_words(const ExpandingMarkovMap& map, int max_length);

struct OrbitWitness {
  Itinerary first;   ///< expanded to the witness period
  Itinerary second;
  double point1 = 0.0;
  double point2 = 0.0;
  double sum1 = 0.0;
  double sum2 = 0.0;
  double gap = 0.0;  ///< |sum1 - sum2|
  std::optional<Rational> exact_sum1, exact_sum2, exact_gap;
};

enum class CohomologyVerdict { WitnessFound, NoWitnessUpToPeriod };

struct CohomologyReport {
  std::optional<OrbitWitness> witness;
  int searched_periods = 0;
  int witness_period = 0;
  std::size_t classes_examined = 0;
  bool exact = false;
  double threshold = 0.0;
  CohomologyVerdict verdict = CohomologyVerdict::NoWitnessUpToPeriod;

  /// A missing witness is not a proof of cohomology to a locally constant roof.
  std::string note() const;
};

struct WitnessOptions {
  double threshold = 1e-10;
  bool prefer_exact = true;
};

/// Groups periodic orbits of length p <= p_max by visit-count vector and
/// compares their Birkhoff sums. Returns the largest-gap pair at the first
/// period where any group splits (lexicographically smallest pair on ties).
CohomologyReport witness_search(const RoofFunction& roof, int max_period, const WitnessOptions& options = {});

struct CoboundaryCertificate {
  double deviation = 0.0;               ///< worst per-branch oscillation of r - gamma o f + gamma
  std::size_t worst_branch = 0;
  std::vector<double> branch_oscillation;
};

/// Oscillation (sup - inf over probes) of r - gamma o f + gamma on each branch.
CoboundaryCertificate certify_coboundary(const RoofFunction& roof, const std::function<double(double)>& gamma,
                                         std::size_t probes = 10000);

/// Value of the C^2 bump a (1 - s^2)^3, s = |x - center| / radius, zero for s >= 1.
double bump_value(double x, double center, double radius, double amplitude);

/// r plus a compactly supported C^2 bump. Throws ProtectedOrbitHit if the
/// support contains a protected point and ModelError if |amplitude| >= r0.
RoofFunction perturb_bump(const RoofFunction& roof, double center, double radius, double amplitude,
                          const std::vector<double>& protected_points);

/// Orbit points of the periodic orbit with this itinerary.
std::vector<double> orbit_points(const ExpandingMarkovMap& map, const Itinerary& itinerary);

std::string itinerary_string(const Itinerary& itinerary);

}  // namespace mixlab
