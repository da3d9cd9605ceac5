#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "mixlab/errors.hpp"
#include "mixlab/rational.hpp"

namespace mixlab {

/// 0/1 matrix over partition indices; entry (i, j) is 1 iff f(cell i) covers cell j.
using TransitionMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

using Itinerary = std::vector<int>;

/// Half-open cell [lo, hi).
template <typename Scalar>
struct BasicCell {
  Scalar lo{};
  Scalar hi{};

  Scalar length() const { return hi - lo; }
  bool contains(const Scalar& x) const { return lo <= x && x < hi; }
};
using Cell = BasicCell<double>;

/// Affine branch x -> slope * x + intercept on [lo, hi).
template <typename Scalar>
struct AffineBranch {
  Scalar lo{};
  Scalar hi{};
  Scalar slope{};
  Scalar intercept{};

  Scalar forward(const Scalar& x) const { return slope * x + intercept; }
  Scalar inverse(const Scalar& y) const { return (y - intercept) / slope; }
};

/// Piecewise-affine Markov map with data in `Scalar` (double or Rational).
///
/// This is the representation that admits exact arithmetic; the generic
/// ExpandingMarkovMap below wraps a double copy of it and keeps a Rational
/// copy for exact oracles when the data are rational.
template <typename Scalar>
class PiecewiseAffineMap {
 public:
  PiecewiseAffineMap() = default;

  /// `breakpoints` has one more entry than `slopes`/`intercepts`. When
  /// `transitions` is empty it is derived from the branch images.
  PiecewiseAffineMap(std::vector<Scalar> breakpoints, std::vector<Scalar> slopes,
                     std::vector<Scalar> intercepts, TransitionMatrix transitions = {})
      : breakpoints_(std::move(breakpoints)) {
    const std::size_t n = slopes.size();
    if (n == 0 || breakpoints_.size() != n + 1 || intercepts.size() != n)
      throw ModelError("affine map: need k+1 breakpoints, k slopes, k intercepts");
    for (std::size_t k = 0; k < n; ++k) {
      if (!(breakpoints_[k] < breakpoints_[k + 1]))
        throw ModelError("affine map: breakpoints must be strictly increasing");
      if (slopes[k] == Scalar(0)) throw ModelError("affine map: zero slope");
      branches_.push_back({breakpoints_[k], breakpoints_[k + 1], slopes[k], intercepts[k]});
    }
    const TransitionMatrix derived = derive_transitions();
    if (transitions.size() == 0) {
      transitions_ = derived;
    } else {
      if (transitions.rows() != static_cast<Eigen::Index>(n) || transitions.cols() != static_cast<Eigen::Index>(n))
        throw ModelError("affine map: transition matrix has wrong shape");
      if (transitions != derived)
        throw ModelError("affine map: transition matrix disagrees with branch images");
      transitions_ = std::move(transitions);
    }
  }

  std::size_t size() const noexcept { return branches_.size(); }
  const AffineBranch<Scalar>& branch(std::size_t k) const { return branches_.at(k); }
  const std::vector<Scalar>& breakpoints() const noexcept { return breakpoints_; }
  const TransitionMatrix& transitions() const noexcept { return transitions_; }
  bool allowed(std::size_t i, std::size_t j) const { return transitions_(i, j) != 0; }

  BasicCell<Scalar> cell(std::size_t k) const { return {branches_[k].lo, branches_[k].hi}; }
  BasicCell<Scalar> domain() const { return {breakpoints_.front(), breakpoints_.back()}; }

  /// Closure image of cell k, sorted.
  BasicCell<Scalar> image(std::size_t k) const {
    const auto& b = branches_[k];
    Scalar a = b.forward(b.lo), c = b.forward(b.hi);
    if (c < a) std::swap(a, c);
    return {a, c};
  }

  Scalar forward(std::size_t k, const Scalar& x) const { return branches_[k].forward(x); }
  Scalar inverse(std::size_t k, const Scalar& y) const { return branches_[k].inverse(y); }

  template <typename Other>
  PiecewiseAffineMap<Other> cast() const {
    std::vector<Other> bp, sl, ic;
    for (const auto& v : breakpoints_) bp.push_back(static_cast<Other>(v));
    for (const auto& b : branches_) {
      sl.push_back(static_cast<Other>(b.slope));
      ic.push_back(static_cast<Other>(b.intercept));
    }
    return PiecewiseAffineMap<Other>(std::move(bp), std::move(sl), std::move(ic), transitions_);
  }

 private:
  // Floating data gets a 1e-12 slack on the Markov endpoint test.
  static bool same(const Scalar& a, const Scalar& b) {
    if constexpr (std::is_floating_point_v<Scalar>)
      return std::abs(a - b) <= 1e-12;
    else
      return a == b;
  }
  static bool leq(const Scalar& a, const Scalar& b) { return a < b || same(a, b); }

  TransitionMatrix derive_transitions() const {
    const std::size_t n = branches_.size();
    TransitionMatrix a = TransitionMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto img = image(i);
      bool lo_hit = false, hi_hit = false;
      for (std::size_t j = 0; j < n; ++j) {
        const auto c = cell(j);
        if (leq(img.lo, c.lo) && leq(c.hi, img.hi)) a(i, j) = 1;
        lo_hit = lo_hit || same(img.lo, c.lo);
        hi_hit = hi_hit || same(img.hi, c.hi);
      }
      if (!lo_hit || !hi_hit)
        throw ModelError("affine map: image of branch " + std::to_string(i) +
                         " is not a union of partition cells");
    }
    return a;
  }

  std::vector<Scalar> breakpoints_;
  std::vector<AffineBranch<Scalar>> branches_;
  TransitionMatrix transitions_;
};

/// One monotone C^2 branch of a generic expanding map.
struct MapBranch {
  Cell domain;
  std::function<double(double)> forward;
  std::function<double(double)> inverse;
  std::function<double(double)> derivative;

  /// Builds the inverse by safeguarded Newton iteration on the closed cell.
  static MapBranch from_forward(Cell domain, std::function<double(double)> forward,
                                std::function<double(double)> derivative);
};

/// Uniformly expanding Markov map of an interval (or circle cut at 0).
///
/// Immutable after construction and safe to share across threads.
class ExpandingMarkovMap {
 public:
  struct Evaluation {
    double image;
    std::size_t branch;
  };

  ExpandingMarkovMap(std::string name, std::vector<MapBranch> branches, TransitionMatrix transitions,
                     double expansion_bound, double distortion_bound);

  /// Wraps affine data; keeps an exact copy when `exact` is given.
  static ExpandingMarkovMap from_affine(std::string name, const PiecewiseAffineMap<double>& affine,
                                        double expansion_bound, double distortion_bound = 0.0,
                                        std::optional<PiecewiseAffineMap<Rational>> exact = std::nullopt);
  static ExpandingMarkovMap from_affine(std::string name, const PiecewiseAffineMap<Rational>& exact,
                                        double expansion_bound, double distortion_bound = 0.0);

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return branches_.size(); }
  const MapBranch& branch(std::size_t k) const { return branches_.at(k); }
  Cell cell(std::size_t k) const { return branches_.at(k).domain; }
  Cell domain() const { return {branches_.front().domain.lo, branches_.back().domain.hi}; }
  Cell image(std::size_t k) const;
  const TransitionMatrix& transitions() const noexcept { return transitions_; }
  bool allowed(std::size_t i, std::size_t j) const { return transitions_(i, j) != 0; }
  double expansion_bound() const noexcept { return expansion_bound_; }
  double distortion_bound() const noexcept { return distortion_bound_; }

  const std::optional<PiecewiseAffineMap<double>>& affine() const noexcept { return affine_; }
  const std::optional<PiecewiseAffineMap<Rational>>& exact() const noexcept { return exact_; }

  /// Index of the cell containing x. Throws BoundaryPoint on a shared cell
  /// endpoint and DomainError outside the domain.
  std::size_t locate(double x) const;
  Evaluation evaluate(double x) const;

  double forward(std::size_t k, double x) const { return branches_[k].forward(x); }
  double inverse(std::size_t k, double y) const { return branches_[k].inverse(y); }
  double derivative(std::size_t k, double x) const { return branches_[k].derivative(x); }

  /// Returns a copy with different claimed bounds.
  ExpandingMarkovMap with_bounds(double expansion_bound, double distortion_bound) const;

 private:
  std::string name_;
  std::vector<MapBranch> branches_;
  TransitionMatrix transitions_;
  double expansion_bound_;
  double distortion_bound_;
  std::optional<PiecewiseAffineMap<double>> affine_;
  std::optional<PiecewiseAffineMap<Rational>> exact_;
};

using MapPtr = std::shared_ptr<const ExpandingMarkovMap>;

// Built-in model zoo.
namespace models {

/// x -> 2x mod 1 on [0,1/2), [1/2,1).
ExpandingMarkovMap doubling();
/// x -> d*x mod 1, d >= 2.
ExpandingMarkovMap circle_expansion(int degree);
/// 2x+1/3 on [0,1/3), 3x-1 on [1/3,2/3), 3x-2 on [2/3,1); transitive, not full branch.
ExpandingMarkovMap three_branch();
/// Nonlinear full-branch map 2x + a sin(2 pi x)/(2 pi) mod 1, |a| < 1.
ExpandingMarkovMap perturbed_doubling(double a);

}  // namespace models

// ---------------------------------------------------------------------------
// Validation

struct AxiomCheck {
  std::string axiom;
  bool pass = false;
  double worst_probe = 0.0;
  double location = 0.0;
};

struct ValidationReport {
  std::vector<AxiomCheck> checks;

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const AxiomCheck& c) { return c.pass; });
  }
  const AxiomCheck& at(const std::string& axiom) const;
};

/// Probe-based check of partition, bijectivity, Markov, expansion and
/// distortion axioms. `probes` points per branch, van der Corput placed.
ValidationReport validate_axioms(const ExpandingMarkovMap& map, std::size_t probes = 10000);

// ---------------------------------------------------------------------------
// Periodic orbits

/// Throws InadmissibleItinerary unless every cyclic transition is allowed.
template <typename Map>
void require_admissible(const Map& map, const Itinerary& itinerary) {
  if (itinerary.empty()) throw InadmissibleItinerary("empty itinerary");
  const std::size_t n = itinerary.size();
  for (std::size_t i = 0; i < n; ++i) {
    const int a = itinerary[i], b = itinerary[(i + 1) % n];
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= map.size() ||
        static_cast<std::size_t>(b) >= map.size() || !map.allowed(a, b))
      throw InadmissibleItinerary("transition " + std::to_string(a) + "->" + std::to_string(b) +
                                  " is not allowed");
  }
}

/// Exact periodic point of an affine map: fixed point of the composed inverse
/// branches h_{w0} o h_{w1} o ... o h_{w(n-1)}.
template <typename Scalar>
Scalar periodic_point(const PiecewiseAffineMap<Scalar>& map, const Itinerary& itinerary) {
  require_admissible(map, itinerary);
  // Composition y -> a*y + b, innermost branch first.
  Scalar a(1), b(0);
  for (auto it = itinerary.rbegin(); it != itinerary.rend(); ++it) {
    const auto& br = map.branch(static_cast<std::size_t>(*it));
    // h(y) = (y - c)/s applied after current composition.
    a = a / br.slope;
    b = (b - br.intercept) / br.slope;
  }
  return b / (Scalar(1) - a);
}

/// Periodic point realizing `itinerary`, by fixed-point iteration of the
/// composed inverse branches (may sit on a cell's closed right end).
double periodic_point(const ExpandingMarkovMap& map, const Itinerary& itinerary);

/// |f^n(x) - x| following the itinerary's branches.
double periodic_residual(const ExpandingMarkovMap& map, const Itinerary& itinerary, double x);

// ---------------------------------------------------------------------------
// Refinement

/// Cylinder of the symbolic coding: cells whose first `itinerary.size()`
/// images follow the itinerary.
template <typename Scalar>
struct Cylinder {
  BasicCell<Scalar> cell;
  Itinerary itinerary;
};

/// Pulls the interval `target` (inside the cell visited last) back through the
/// inverse branches of `itinerary` (first entry applied last).
template <typename Scalar, typename Map>
BasicCell<Scalar> pull_back(const Map& map, const Itinerary& itinerary, BasicCell<Scalar> target) {
  for (auto it = itinerary.rbegin(); it != itinerary.rend(); ++it) {
    Scalar a = map.inverse(static_cast<std::size_t>(*it), target.lo);
    Scalar b = map.inverse(static_cast<std::size_t>(*it), target.hi);
    if (b < a) std::swap(a, b);
    target = {a, b};
  }
  return target;
}

/// All admissible cylinders of length `length` (>= 1), ordered by position.
template <typename Scalar, typename Map>
std::vector<Cylinder<Scalar>> cylinders(const Map& map, int length) {
  std::vector<Cylinder<Scalar>> out;
  std::vector<Itinerary> words;
  for (std::size_t k = 0; k < map.size(); ++k) words.push_back({static_cast<int>(k)});
  for (int len = 1; len < length; ++len) {
    std::vector<Itinerary> next;
    for (const auto& w : words)
      for (std::size_t k = 0; k < map.size(); ++k)
        if (map.allowed(static_cast<std::size_t>(w.back()), k)) {
          auto e = w;
          e.push_back(static_cast<int>(k));
          next.push_back(std::move(e));
        }
    words = std::move(next);
  }
  for (auto& w : words) {
    const auto last = map.cell(static_cast<std::size_t>(w.back()));
    Itinerary prefix(w.begin(), w.end() - 1);
    const BasicCell<Scalar> target{Scalar(last.lo), Scalar(last.hi)};
    out.push_back({pull_back<Scalar>(map, prefix, target), std::move(w)});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.cell.lo < b.cell.lo; });
  return out;
}

/// Same map on the partition refined into cylinders of length level + 1.
ExpandingMarkovMap refine(const ExpandingMarkovMap& map, int level);

}  // namespace mixlab
