#include "mixlab/markov_map.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "mixlab/random.hpp"

namespace mixlab {
namespace {

constexpr double kEndpointTol = 1e-12;

TransitionMatrix transitions_from_images(const std::vector<MapBranch>& branches) {
  const auto n = static_cast<Eigen::Index>(branches.size());
  TransitionMatrix a = TransitionMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& b = branches[static_cast<std::size_t>(i)];
    double lo = b.forward(b.domain.lo), hi = b.forward(b.domain.hi);
    if (hi < lo) std::swap(lo, hi);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& c = branches[static_cast<std::size_t>(j)].domain;
      if (lo <= c.lo + kEndpointTol && c.hi <= hi + kEndpointTol) a(i, j) = 1;
    }
  }
  return a;
}

}  // namespace

MapBranch MapBranch::from_forward(Cell domain, std::function<double(double)> forward,
                                  std::function<double(double)> derivative) {
  MapBranch b;
  b.domain = domain;
  b.forward = forward;
  b.derivative = derivative;
  b.inverse = [domain, forward, derivative](double y) {
    double lo = domain.lo, hi = domain.hi;
    const double flo = forward(lo), fhi = forward(hi);
    const bool increasing = fhi > flo;
    if (y == flo) return lo;
    if (y == fhi) return hi;
    double x = lo + (y - flo) / (fhi - flo) * (hi - lo);
    for (int it = 0; it < 200; ++it) {
      const double r = forward(x) - y;
      if (r == 0.0) return x;
      // Keep the bracket [lo, hi] around the root.
      if ((r > 0) == increasing)
        hi = x;
      else
        lo = x;
      double next = x - r / derivative(x);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - x) <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
        return next;
      x = next;
    }
    return x;
  };
  return b;
}

ExpandingMarkovMap::ExpandingMarkovMap(std::string name, std::vector<MapBranch> branches,
                                       TransitionMatrix transitions, double expansion_bound,
                                       double distortion_bound)
    : name_(std::move(name)),
      branches_(std::move(branches)),
      expansion_bound_(expansion_bound),
      distortion_bound_(distortion_bound) {
  if (branches_.empty()) throw ModelError("map '" + name_ + "' has no branches");
  for (std::size_t k = 0; k < branches_.size(); ++k) {
    const auto& b = branches_[k];
    if (!(b.domain.lo < b.domain.hi)) throw ModelError("branch " + std::to_string(k) + " has empty cell");
    if (!b.forward || !b.inverse || !b.derivative)
      throw ModelError("branch " + std::to_string(k) + " is missing a callable");
    if (k > 0 && !(branches_[k - 1].domain.lo < b.domain.lo))
      throw ModelError("branches must be ordered by position");
  }
  if (!(expansion_bound_ > 0.0 && expansion_bound_ < 1.0))
    throw ModelError("expansion bound must lie in (0,1)");
  const TransitionMatrix derived = transitions_from_images(branches_);
  if (transitions.size() == 0) {
    transitions_ = derived;
  } else if (transitions != derived) {
    throw ModelError("map '" + name_ + "': transition matrix disagrees with branch images");
  } else {
    transitions_ = std::move(transitions);
  }
}

ExpandingMarkovMap ExpandingMarkovMap::from_affine(std::string name, const PiecewiseAffineMap<double>& affine,
                                                   double expansion_bound, double distortion_bound,
                                                   std::optional<PiecewiseAffineMap<Rational>> exact) {
  std::vector<MapBranch> branches;
  for (std::size_t k = 0; k < affine.size(); ++k) {
    const auto b = affine.branch(k);
    branches.push_back({{b.lo, b.hi},
                        [b](double x) { return b.forward(x); },
                        [b](double y) { return b.inverse(y); },
                        [b](double) { return b.slope; }});
  }
  ExpandingMarkovMap map(std::move(name), std::move(branches), affine.transitions(), expansion_bound,
                         distortion_bound);
  map.affine_ = affine;
  map.exact_ = std::move(exact);
  return map;
}

ExpandingMarkovMap ExpandingMarkovMap::from_affine(std::string name, const PiecewiseAffineMap<Rational>& exact,
                                                   double expansion_bound, double distortion_bound) {
  return from_affine(std::move(name), exact.cast<double>(), expansion_bound, distortion_bound, exact);
}

ExpandingMarkovMap ExpandingMarkovMap::with_bounds(double expansion_bound, double distortion_bound) const {
  ExpandingMarkovMap copy = *this;
  if (!(expansion_bound > 0.0 && expansion_bound < 1.0))
    throw ModelError("expansion bound must lie in (0,1)");
  copy.expansion_bound_ = expansion_bound;
  copy.distortion_bound_ = distortion_bound;
  return copy;
}

Cell ExpandingMarkovMap::image(std::size_t k) const {
  const auto& b = branches_.at(k);
  double lo = b.forward(b.domain.lo), hi = b.forward(b.domain.hi);
  if (hi < lo) std::swap(lo, hi);
  return {lo, hi};
}

std::size_t ExpandingMarkovMap::locate(double x) const {
  const Cell dom = domain();
  if (!(x >= dom.lo && x < dom.hi))
    throw DomainError("point " + std::to_string(x) + " outside the domain of '" + name_ + "'");
  // First cell whose lower end exceeds x, minus one.
  const auto it = std::upper_bound(branches_.begin(), branches_.end(), x,
                                   [](double v, const MapBranch& b) { return v < b.domain.lo; });
  const auto k = static_cast<std::size_t>(std::distance(branches_.begin(), it)) - 1;
  if (k > 0 && x == branches_[k].domain.lo)
    throw BoundaryPoint("point " + std::to_string(x) + " lies on a partition boundary");
  return k;
}

ExpandingMarkovMap::Evaluation ExpandingMarkovMap::evaluate(double x) const {
  const std::size_t k = locate(x);
  return {branches_[k].forward(x), k};
}

const AxiomCheck& ValidationReport::at(const std::string& axiom) const {
  for (const auto& c : checks)
    if (c.axiom == axiom) return c;
  throw std::out_of_range("no axiom '" + axiom + "' in report");
}

ValidationReport validate_axioms(const ExpandingMarkovMap& map, std::size_t probes) {
  if (probes == 0) throw std::invalid_argument("validate_axioms: probes must be >= 1");
  ValidationReport report;
  const std::size_t n = map.size();
  const Cell dom = map.domain();

  {
    AxiomCheck c{"partition", true, 0.0, dom.lo};
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      total += map.cell(k).length();
      if (k + 1 < n) {
        const double gap = std::abs(map.cell(k + 1).lo - map.cell(k).hi);
        if (gap > c.worst_probe) c = {"partition", true, gap, map.cell(k).hi};
      }
    }
    const double mismatch = std::abs(total - dom.length());
    if (mismatch > c.worst_probe) c.worst_probe = mismatch;
    c.pass = c.worst_probe <= kEndpointTol;
    report.checks.push_back(c);
  }

  {
    AxiomCheck c{"bijectivity", true, 0.0, dom.lo};
    for (std::size_t k = 0; k < n; ++k) {
      const Cell cell = map.cell(k);
      const Cell img = map.image(k);
      for (std::size_t i = 0; i < probes; ++i) {
        const double q = van_der_corput(i);
        const double y = img.lo + q * img.length();
        const double x = cell.lo + q * cell.length();
        const double r1 = std::abs(map.forward(k, map.inverse(k, y)) - y);
        const double r2 = std::abs(map.inverse(k, map.forward(k, x)) - x);
        if (r1 > c.worst_probe) c = {"bijectivity", true, r1, map.inverse(k, y)};
        if (r2 > c.worst_probe) c = {"bijectivity", true, r2, x};
      }
    }
    c.pass = c.worst_probe <= kEndpointTol;
    report.checks.push_back(c);
  }

  {
    AxiomCheck c{"markov", true, 0.0, dom.lo};
    std::vector<double> edges;
    for (std::size_t k = 0; k < n; ++k) edges.push_back(map.cell(k).lo);
    edges.push_back(dom.hi);
    for (std::size_t k = 0; k < n; ++k) {
      const Cell img = map.image(k);
      for (const double e : {img.lo, img.hi}) {
        double best = std::numeric_limits<double>::infinity();
        for (const double b : edges) best = std::min(best, std::abs(e - b));
        if (best > c.worst_probe) c = {"markov", true, best, e};
      }
    }
    c.pass = c.worst_probe <= kEndpointTol;
    report.checks.push_back(c);
  }

  {
    AxiomCheck c{"expansion", true, 0.0, dom.lo};
    for (std::size_t k = 0; k < n; ++k) {
      const Cell cell = map.cell(k);
      for (std::size_t i = 0; i < probes; ++i) {
        const double x = cell.lo + van_der_corput(i) * cell.length();
        const double inv = 1.0 / std::abs(map.derivative(k, x));
        if (inv > c.worst_probe) c = {"expansion", true, inv, x};
      }
    }
    c.pass = c.worst_probe <= map.expansion_bound() + kEndpointTol;
    report.checks.push_back(c);
  }

  // |D((log J) o h)| with J = 1/|f'|, by centred differences in the image variable,
  // and the chained bound sup|D log Jf| / (1 - lambda) that covers every
  // first-return branch built from f.
  {
    AxiomCheck direct{"distortion", true, 0.0, dom.lo};
    AxiomCheck chain{"distortion_chain", true, 0.0, dom.lo};
    double sup_log_jf = 0.0, sup_at = dom.lo;
    for (std::size_t k = 0; k < n; ++k) {
      const Cell cell = map.cell(k);
      const Cell img = map.image(k);
      const double hy = 1e-5 * img.length();
      const double hx = 1e-5 * cell.length();
      auto log_j_of_h = [&](double y) { return -std::log(std::abs(map.derivative(k, map.inverse(k, y)))); };
      auto log_jf = [&](double x) { return -std::log(std::abs(map.derivative(k, x))); };
      for (std::size_t i = 0; i < probes; ++i) {
        const double q = van_der_corput(i);
        const double y = img.lo + hy + q * (img.length() - 2 * hy);
        const double d1 = std::abs(log_j_of_h(y + hy) - log_j_of_h(y - hy)) / (2 * hy);
        if (d1 > direct.worst_probe) direct = {"distortion", true, d1, y};
        const double x = cell.lo + hx + q * (cell.length() - 2 * hx);
        const double d2 = std::abs(log_jf(x + hx) - log_jf(x - hx)) / (2 * hx);
        if (d2 > sup_log_jf) {
          sup_log_jf = d2;
          sup_at = x;
        }
      }
    }
    // Finite differences carry O(h^2) and roundoff noise.
    constexpr double fd_slack = 1e-6;
    direct.pass = direct.worst_probe <= map.distortion_bound() + fd_slack;
    chain.worst_probe = sup_log_jf / (1.0 - map.expansion_bound());
    chain.location = sup_at;
    chain.pass = chain.worst_probe <= map.distortion_bound() + fd_slack;
    report.checks.push_back(direct);
    report.checks.push_back(chain);
  }
  return report;
}

double periodic_point(const ExpandingMarkovMap& map, const Itinerary& itinerary) {
  require_admissible(map, itinerary);
  if (map.affine()) return periodic_point(*map.affine(), itinerary);
  const Cell start = map.cell(static_cast<std::size_t>(itinerary.front()));
  double x = 0.5 * (start.lo + start.hi);
  for (int it = 0; it < 1000; ++it) {
    double y = x;
    for (auto w = itinerary.rbegin(); w != itinerary.rend(); ++w) y = map.inverse(static_cast<std::size_t>(*w), y);
    if (std::abs(y - x) <= 1e-17) return y;
    x = y;
  }
  return x;
}

double periodic_residual(const ExpandingMarkovMap& map, const Itinerary& itinerary, double x) {
  double y = x;
  for (const int w : itinerary) y = map.forward(static_cast<std::size_t>(w), y);
  return std::abs(y - x);
}

ExpandingMarkovMap refine(const ExpandingMarkovMap& map, int level) {
  if (level < 0) throw std::invalid_argument("refine: level must be >= 0");
  if (level == 0) return map;
  const std::string name = map.name() + "/refined" + std::to_string(level);
  if (map.exact()) {
    const auto cyl = cylinders<Rational>(*map.exact(), level + 1);
    std::vector<Rational> bp, sl, ic;
    for (const auto& c : cyl) {
      bp.push_back(c.cell.lo);
      const auto& b = map.exact()->branch(static_cast<std::size_t>(c.itinerary.front()));
      sl.push_back(b.slope);
      ic.push_back(b.intercept);
    }
    bp.push_back(cyl.back().cell.hi);
    return ExpandingMarkovMap::from_affine(name, PiecewiseAffineMap<Rational>(bp, sl, ic), map.expansion_bound(),
                                           map.distortion_bound());
  }
  const auto cyl = cylinders<double>(map, level + 1);
  std::vector<MapBranch> branches;
  for (const auto& c : cyl) {
    MapBranch b = map.branch(static_cast<std::size_t>(c.itinerary.front()));
    b.domain = c.cell;
    branches.push_back(std::move(b));
  }
  return ExpandingMarkovMap(name, std::move(branches), {}, map.expansion_bound(), map.distortion_bound());
}

namespace models {

ExpandingMarkovMap circle_expansion(int degree) {
  if (degree < 2) throw ModelError("circle expansion degree must be >= 2");
  std::vector<Rational> bp, sl, ic;
  for (int k = 0; k <= degree; ++k) bp.emplace_back(k, degree);
  for (int k = 0; k < degree; ++k) {
    sl.emplace_back(degree);
    ic.emplace_back(-k);
  }
  const std::string name = degree == 2 ? "doubling" : "circle_x" + std::to_string(degree);
  return ExpandingMarkovMap::from_affine(name, PiecewiseAffineMap<Rational>(bp, sl, ic), 1.0 / degree, 0.0);
}

ExpandingMarkovMap doubling() { return circle_expansion(2); }

ExpandingMarkovMap three_branch() {
  const std::vector<Rational> bp{Rational(0), Rational(1, 3), Rational(2, 3), Rational(1)};
  const std::vector<Rational> sl{Rational(2), Rational(3), Rational(3)};
  const std::vector<Rational> ic{Rational(1, 3), Rational(-1), Rational(-2)};
  return ExpandingMarkovMap::from_affine("three_branch", PiecewiseAffineMap<Rational>(bp, sl, ic), 0.5, 0.0);
}

ExpandingMarkovMap perturbed_doubling(double a) {
  if (!(std::abs(a) < 1.0)) throw ModelError("perturbed doubling needs |a| < 1");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<MapBranch> branches;
  for (int k = 0; k < 2; ++k) {
    auto fwd = [a, k](double x) { return 2.0 * x - k + a * std::sin(two_pi * x) / two_pi; };
    auto der = [a](double x) { return 2.0 + a * std::cos(two_pi * x); };
    branches.push_back(MapBranch::from_forward({0.5 * k, 0.5 * (k + 1)}, fwd, der));
  }
  const double lambda = 1.0 / (2.0 - std::abs(a));
  const double sup_dlog = two_pi * std::abs(a) / (2.0 - std::abs(a));
  return ExpandingMarkovMap("perturbed_doubling", std::move(branches), {}, lambda, sup_dlog / (1.0 - lambda));
}

}  // namespace models
}  // namespace mixlab
