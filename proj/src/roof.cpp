#include "mixlab/roof.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "mixlab/parallel.hpp"
#include "mixlab/random.hpp"

namespace mixlab {
namespace {

constexpr std::size_t kBoundProbes = 10000;

Polynomial<double> to_double(const Polynomial<Rational>& p) { return p.cast<double>(); }

std::string rational_list(const std::vector<Rational>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i].str();
  return s;
}

}  // namespace

RoofFunction::RoofFunction(MapPtr base, BranchValue value, std::string description,
                           std::optional<PiecewisePolynomial> exact)
    : base_(std::move(base)), value_(std::move(value)), description_(std::move(description)), exact_(std::move(exact)) {
  if (!base_) throw ModelError("roof needs a base map");
  if (exact_ && exact_->size() != base_->size()) throw ModelError("roof: one polynomial per branch required");

  lower_ = std::numeric_limits<double>::infinity();
  upper_ = -std::numeric_limits<double>::infinity();
  lipschitz_ = 0.0;
  for (std::size_t k = 0; k < base_->size(); ++k) {
    const Cell cell = base_->cell(k);
    const Cell img = base_->image(k);
    std::optional<Polynomial<double>> deriv;
    if (exact_) deriv = to_double((*exact_)[k].derivative());
    const double h = 1e-6 * img.length();
    for (std::size_t i = 0; i < kBoundProbes + 2; ++i) {
      const double q = i < kBoundProbes ? van_der_corput(i) : (i == kBoundProbes ? 0.0 : 1.0);
      const double x = cell.lo + q * cell.length();
      const double v = value_(k, x);
      lower_ = std::min(lower_, v);
      upper_ = std::max(upper_, v);
      double slope;
      if (deriv) {
        slope = std::abs((*deriv)(x)) / std::abs(base_->derivative(k, x));
      } else {
        const double y = std::clamp(img.lo + q * img.length(), img.lo + h, img.hi - h);
        slope = std::abs(value_(k, base_->inverse(k, y + h)) - value_(k, base_->inverse(k, y - h))) / (2 * h);
      }
      lipschitz_ = std::max(lipschitz_, slope);
    }
  }
  lipschitz_ *= 1.0 + 1e-6;
  if (!(lower_ > 0.0)) throw ModelError("roof '" + description_ + "' is not bounded away from zero");
}

RoofFunction RoofFunction::with_bounds(double lower, double upper, double lipschitz) const {
  RoofFunction copy = *this;
  copy.lower_ = lower;
  copy.upper_ = upper;
  copy.lipschitz_ = lipschitz;
  return copy;
}

RoofFunction RoofFunction::constant(MapPtr base, Rational c) {
  const std::size_t n = base->size();
  return piecewise_polynomial(std::move(base), std::vector<std::vector<Rational>>(n, {c}))
      .relabel("constant " + c.str());
}

RoofFunction RoofFunction::polynomial(MapPtr base, const std::vector<Rational>& coefficients) {
  const std::size_t n = base->size();
  return piecewise_polynomial(std::move(base), std::vector<std::vector<Rational>>(n, coefficients))
      .relabel("polynomial " + rational_list(coefficients));
}

RoofFunction RoofFunction::cellwise_constant(MapPtr base, const std::vector<Rational>& values) {
  std::vector<std::vector<Rational>> per_branch;
  for (const auto& v : values) per_branch.push_back({v});
  return piecewise_polynomial(std::move(base), per_branch).relabel("cellwise " + rational_list(values));
}

RoofFunction RoofFunction::piecewise_polynomial(MapPtr base, const std::vector<std::vector<Rational>>& per_branch) {
  if (per_branch.size() != base->size())
    throw ModelError("piecewise roof: expected " + std::to_string(base->size()) + " branch polynomials");
  PiecewisePolynomial exact;
  std::vector<Polynomial<double>> approx;
  std::string desc = "piecewise";
  for (const auto& coeffs : per_branch) {
    if (coeffs.empty()) throw ModelError("piecewise roof: empty coefficient list");
    exact.emplace_back(coeffs);
    approx.push_back(to_double(exact.back()));
    desc += " [" + rational_list(coeffs) + "]";
  }
  auto value = [approx](std::size_t k, double x) { return approx[k](x); };
  return RoofFunction(std::move(base), value, desc, std::move(exact));
}

RoofFunction RoofFunction::trigonometric(MapPtr base, double a0, const std::vector<double>& cos_coeffs,
                                         const std::vector<double>& sin_coeffs) {
  auto value = [a0, cos_coeffs, sin_coeffs](std::size_t, double x) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double v = a0;
    for (std::size_t k = 0; k < cos_coeffs.size(); ++k) v += cos_coeffs[k] * std::cos(two_pi * (k + 1) * x);
    for (std::size_t k = 0; k < sin_coeffs.size(); ++k) v += sin_coeffs[k] * std::sin(two_pi * (k + 1) * x);
    return v;
  };
  return RoofFunction(std::move(base), value, "trigonometric");
}

ValidationReport validate_roof(const RoofFunction& roof, std::size_t probes) {
  if (probes == 0) throw std::invalid_argument("validate_roof: probes must be >= 1");
  const auto& map = roof.base();
  AxiomCheck lower{"roof_lower_bound", true, std::numeric_limits<double>::infinity(), 0.0};
  AxiomCheck lip{"roof_branch_lipschitz", true, 0.0, 0.0};
  for (std::size_t k = 0; k < map.size(); ++k) {
    const Cell cell = map.cell(k);
    const Cell img = map.image(k);
    const double h = 1e-6 * img.length();
    for (std::size_t i = 0; i < probes; ++i) {
      const double q = van_der_corput(i);
      const double x = cell.lo + q * cell.length();
      const double v = roof.on_branch(k, x);
      if (v < lower.worst_probe) {
        lower.worst_probe = v;
        lower.location = x;
      }
      const double y = std::min(img.lo + q * img.length(), img.hi - h);
      const double slope = std::abs(roof.on_branch(k, map.inverse(k, y + h)) - roof.on_branch(k, map.inverse(k, y))) / h;
      if (slope > lip.worst_probe) {
        lip.worst_probe = slope;
        lip.location = map.inverse(k, y);
      }
    }
  }
  lower.pass = roof.lower_bound() > 0.0 && lower.worst_probe >= roof.lower_bound() - 1e-12;
  lip.pass = lip.worst_probe <= roof.branch_lipschitz() * (1.0 + 1e-6) + 1e-9;
  return {{lower, lip}};
}

double birkhoff_sum(const RoofFunction& roof, double x, int n) {
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    const std::size_t k = roof.base().locate(x);
    s += roof.on_branch(k, x);
    x = roof.base().forward(k, x);
  }
  return s;
}

namespace {

std::size_t locate_exact(const PiecewiseAffineMap<Rational>& map, const Rational& x) {
  const auto dom = map.domain();
  if (x < dom.lo || !(x < dom.hi)) throw DomainError("point " + x.str() + " outside the domain");
  for (std::size_t k = 0; k < map.size(); ++k) {
    const auto c = map.cell(k);
    if (k > 0 && x == c.lo) throw BoundaryPoint("point " + x.str() + " lies on a partition boundary");
    if (c.contains(x)) return k;
  }
  throw DomainError("point " + x.str() + " not located");
}

const PiecewiseAffineMap<Rational>& require_exact_base(const RoofFunction& roof) {
  if (!roof.has_exact_path()) throw std::logic_error("roof '" + roof.description() + "' has no exact path");
  return *roof.base().exact();
}

}  // namespace

Rational birkhoff_sum_exact(const RoofFunction& roof, Rational x, int n) {
  const auto& map = require_exact_base(roof);
  Rational s(0);
  for (int j = 0; j < n; ++j) {
    const std::size_t k = locate_exact(map, x);
    s += (*roof.exact())[k](x);
    x = map.forward(k, x);
  }
  return s;
}

double orbit_sum(const RoofFunction& roof, const Itinerary& itinerary, double x) {
  double s = 0.0;
  for (const int w : itinerary) {
    const auto k = static_cast<std::size_t>(w);
    s += roof.on_branch(k, x);
    x = roof.base().forward(k, x);
  }
  return s;
}

Rational orbit_sum_exact(const RoofFunction& roof, const Itinerary& itinerary, const Rational& x0) {
  const auto& map = require_exact_base(roof);
  Rational s(0), x = x0;
  for (const int w : itinerary) {
    const auto k = static_cast<std::size_t>(w);
    s += (*roof.exact())[k](x);
    x = map.forward(k, x);
  }
  return s;
}

double induced_roof(const RoofFunction& roof, const InducedCell<double>& cell, double x) {
  return orbit_sum(roof, cell.itinerary, x);
}

std::vector<Itinerary> admissible_lyndon_words(const ExpandingMarkovMap& map, int max_length) {
  std::vector<Itinerary> out;
  const int k = static_cast<int>(map.size());
  if (max_length < 1) return out;
  // Duval's generation of Lyndon words in lexicographic order.
  Itinerary w{-1};
  while (!w.empty()) {
    ++w.back();
    const Itinerary& word = w;
    bool ok = true;
    for (std::size_t i = 0; i < word.size() && ok; ++i)
      ok = map.allowed(static_cast<std::size_t>(word[i]), static_cast<std::size_t>(word[(i + 1) % word.size()]));
    if (ok) out.push_back(word);
    const std::size_t m = w.size();
    while (w.size() < static_cast<std::size_t>(max_length)) w.push_back(w[w.size() - m]);
    while (!w.empty() && w.back() == k - 1) w.pop_back();
  }
  return out;
}

std::string itinerary_string(const Itinerary& itinerary) {
  std::string s;
  const bool wide = std::any_of(itinerary.begin(), itinerary.end(), [](int v) { return v > 9; });
  for (std::size_t i = 0; i < itinerary.size(); ++i) {
    if (wide && i) s += '.';
    s += std::to_string(itinerary[i]);
  }
  return s;
}

std::string CohomologyReport::note() const {
  if (verdict == CohomologyVerdict::WitnessFound)
    return "periodic-orbit witness: roof is not cohomologous to a locally constant function";
  return "no witness up to period " + std::to_string(searched_periods) +
         "; this is not a certificate that the roof is cohomologous to a locally constant function";
}

namespace {

struct OrbitClass {
  Itinerary word;
  double point = 0.0;
  double sum = 0.0;
  std::optional<Rational> exact_sum;
  std::optional<Rational> exact_point;
};

Itinerary repeat(const Itinerary& w, int times) {
  Itinerary out;
  for (int t = 0; t < times; ++t) out.insert(out.end(), w.begin(), w.end());
  return out;
}

std::vector<OrbitClass> orbit_classes(const RoofFunction& roof, int max_period, bool exact) {
  const auto words = admissible_lyndon_words(roof.base(), max_period);
  std::vector<OrbitClass> classes(words.size());
  parallel_for(words.size(), [&](std::size_t i) {
    OrbitClass c;
    c.word = words[i];
    if (exact) {
      const Rational x = periodic_point(*roof.base().exact(), c.word);
      c.exact_point = x;
      c.exact_sum = orbit_sum_exact(roof, c.word, x);
      c.point = x.to_double();
      c.sum = c.exact_sum->to_double();
    } else {
      c.point = periodic_point(roof.base(), c.word);
      c.sum = orbit_sum(roof, c.word, c.point);
    }
    classes[i] = std::move(c);
  });
  return classes;
}

}  // namespace

CohomologyReport witness_search(const RoofFunction& roof, int max_period, const WitnessOptions& options) {
  if (max_period < 2) throw std::invalid_argument("witness_search: max_period must be >= 2");
  CohomologyReport report;
  report.searched_periods = max_period;
  report.threshold = options.threshold;

  std::vector<OrbitClass> classes;
  report.exact = options.prefer_exact && roof.has_exact_path();
  if (report.exact) {
    try {
      classes = orbit_classes(roof, max_period, true);
    } catch (const ExactOverflow&) {
      report.exact = false;
    }
  }
  if (!report.exact) classes = orbit_classes(roof, max_period, false);
  report.classes_examined = classes.size();

  const std::size_t alphabet = roof.base().size();
  for (int p = 2; p <= max_period; ++p) {
    // Orbits of length p: primitive words of length q | p, traversed p/q times.
    std::map<std::vector<int>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < classes.size(); ++i) {
      const int q = static_cast<int>(classes[i].word.size());
      if (p % q != 0) continue;
      std::vector<int> visits(alphabet, 0);
      for (const int w : classes[i].word) visits[static_cast<std::size_t>(w)] += p / q;
      groups[visits].push_back(i);
    }

    std::optional<OrbitWitness> best;
    for (const auto& [visits, members] : groups) {
      for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
          const auto& ca = classes[members[a]];
          const auto& cb = classes[members[b]];
          const int ra = p / static_cast<int>(ca.word.size());
          const int rb = p / static_cast<int>(cb.word.size());
          OrbitWitness w;
          w.first = repeat(ca.word, ra);
          w.second = repeat(cb.word, rb);
          w.point1 = ca.point;
          w.point2 = cb.point;
          bool is_witness;
          if (report.exact) {
            w.exact_sum1 = *ca.exact_sum * Rational(ra);
            w.exact_sum2 = *cb.exact_sum * Rational(rb);
            w.exact_gap = abs(*w.exact_sum1 - *w.exact_sum2);
            w.sum1 = w.exact_sum1->to_double();
            w.sum2 = w.exact_sum2->to_double();
            w.gap = w.exact_gap->to_double();
            is_witness = *w.exact_gap != Rational(0);
          } else {
            w.sum1 = ca.sum * ra;
            w.sum2 = cb.sum * rb;
            w.gap = std::abs(w.sum1 - w.sum2);
            is_witness = w.gap > options.threshold;
          }
          if (!is_witness) continue;
          if (w.second < w.first) {
            std::swap(w.first, w.second);
            std::swap(w.point1, w.point2);
            std::swap(w.sum1, w.sum2);
            std::swap(w.exact_sum1, w.exact_sum2);
          }
          const bool better = !best ||
                              (report.exact ? *w.exact_gap > *best->exact_gap : w.gap > best->gap) ||
                              ((report.exact ? *w.exact_gap == *best->exact_gap : w.gap == best->gap) &&
                               std::tie(w.first, w.second) < std::tie(best->first, best->second));
          if (better) best = std::move(w);
        }
      }
    }
    if (best) {
      report.witness = std::move(best);
      report.witness_period = p;
      report.verdict = CohomologyVerdict::WitnessFound;
      return report;
    }
  }
  return report;
}

CoboundaryCertificate certify_coboundary(const RoofFunction& roof, const std::function<double(double)>& gamma,
                                         std::size_t probes) {
  if (probes == 0) throw std::invalid_argument("certify_coboundary: probes must be >= 1");
  const auto& map = roof.base();
  CoboundaryCertificate cert;
  cert.branch_oscillation.resize(map.size());
  for (std::size_t k = 0; k < map.size(); ++k) {
    const Cell cell = map.cell(k);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < probes; ++i) {
      const double x = cell.lo + van_der_corput(i) * cell.length();
      const double v = roof.on_branch(k, x) - gamma(map.forward(k, x)) + gamma(x);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    cert.branch_oscillation[k] = hi - lo;
    if (hi - lo > cert.deviation) {
      cert.deviation = hi - lo;
      cert.worst_branch = k;
    }
  }
  return cert;
}

double bump_value(double x, double center, double radius, double amplitude) {
  const double s = std::abs(x - center) / radius;
  if (s >= 1.0) return 0.0;
  const double t = 1.0 - s * s;
  return amplitude * t * t * t;
}

RoofFunction perturb_bump(const RoofFunction& roof, double center, double radius, double amplitude,
                          const std::vector<double>& protected_points) {
  if (!(radius > 0.0)) throw std::invalid_argument("perturb_bump: radius must be positive");
  for (const double p : protected_points)
    if (std::abs(p - center) < radius)
      throw ProtectedOrbitHit("bump support around " + std::to_string(center) + " contains protected point " +
                              std::to_string(p));
  if (!(std::abs(amplitude) < roof.lower_bound()))
    throw ModelError("perturb_bump: |amplitude| must stay below the roof lower bound");
  if (amplitude == 0.0) return roof;

  const auto base_value = roof.value_;
  auto value = [base_value, center, radius, amplitude](std::size_t k, double x) {
    const double s = std::abs(x - center) / radius;
    if (s >= 1.0) return base_value(k, x);
    return base_value(k, x) + bump_value(x, center, radius, amplitude);
  };
  RoofFunction out = roof;
  out.value_ = value;
  out.exact_.reset();
  out.description_ = roof.description_ + " + bump(" + std::to_string(center) + "," + std::to_string(radius) + "," +
                     std::to_string(amplitude) + ")";
  // max_s |d/ds (1-s^2)^3| = 96 / (25 sqrt 5), attained at s = 1/sqrt 5.
  const double bump_slope = std::abs(amplitude) * 96.0 / (25.0 * std::sqrt(5.0)) / radius;
  out.lower_ = roof.lower_ - std::max(0.0, -amplitude);
  out.upper_ = roof.upper_ + std::max(0.0, amplitude);
  out.lipschitz_ = roof.lipschitz_ + bump_slope * roof.base().expansion_bound();
  return out;
}

std::vector<double> orbit_points(const ExpandingMarkovMap& map, const Itinerary& itinerary) {
  std::vector<double> pts;
  double x = periodic_point(map, itinerary);
  for (const int w : itinerary) {
    pts.push_back(x);
    x = map.forward(static_cast<std::size_t>(w), x);
  }
  return pts;
}

}  // namespace mixlab
