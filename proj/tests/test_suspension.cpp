#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mixlab/parallel.hpp"
#include "mixlab/random.hpp"
#include "mixlab/suspension.hpp"

using namespace mixlab;

namespace {

MapPtr doubling() {
  static const MapPtr f = std::make_shared<const ExpandingMarkovMap>(models::doubling());
  return f;
}

std::shared_ptr<const InvariantDensity> lebesgue() {
  static const auto d = std::make_shared<const InvariantDensity>(invariant_density(build_ulam(doubling(), 1024)));
  return d;
}

RoofFunction xsq() { return RoofFunction::polynomial(doubling(), {Rational(1), Rational(0), Rational(1)}); }

double cos_u(const PhasePoint& p) { return std::cos(2.0 * std::numbers::pi * p.u); }

}  // namespace

TEST_CASE("flow examples") {
  const SuspensionSemiflow unit(RoofFunction::constant(doubling(), Rational(1)), lebesgue());
  auto p = unit.flow_to({0.4, 0.3, {}}, 0.4);
  CHECK(p.x == doctest::Approx(0.4));
  CHECK(p.u == doctest::Approx(0.7));
  p = unit.flow_to({0.3, 0.9, {}}, 0.2);
  CHECK(p.x == doctest::Approx(0.6));
  CHECK(p.u == doctest::Approx(0.1));
  CHECK_THROWS_AS(unit.flow_to({0.3, 0.9, {}}, -1.0), std::invalid_argument);

  // One full period of the 4-cycle 1/5 -> 2/5 -> 4/5 -> 3/5 takes 26/5.
  const SuspensionSemiflow s(xsq(), lebesgue());
  p = s.flow_to({0.2, 0.0, {}}, 5.2 + 1e-9);
  CHECK(p.x == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(p.u == doctest::Approx(0.0).epsilon(1e-7));
  p = s.flow_to({0.2, 0.0, {}}, 5.2 - 1e-9);
  CHECK(p.x == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("semigroup property") {
  const SuspensionSemiflow s(xsq(), lebesgue());
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const PhasePoint p = s.sample_one(rng);
    const double a = rng.uniform(0.0, 5.0), b = rng.uniform(0.0, 5.0);
    const auto once = s.flow_to(p, a + b);
    const auto twice = s.flow_to(s.flow_to(p, a), b);
    CHECK(once.x == doctest::Approx(twice.x).epsilon(1e-9));
    CHECK(once.u == doctest::Approx(twice.u).epsilon(1e-9));
  }
}

TEST_CASE("invariant sampling") {
  const SuspensionSemiflow s(xsq(), lebesgue());
  CHECK(s.mean_roof() == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
  const auto pts = s.sample_invariant(200000, 11);
  // x is length-biased: density (1 + x^2) / (4/3).
  auto mass = [](double a, double b) { return (b - a + (b * b * b - a * a * a) / 3.0) * 0.75; };
  std::vector<double> counts(4, 0.0);
  double ratio = 0.0;
  for (const auto& p : pts) {
    counts[std::min<std::size_t>(3, static_cast<std::size_t>(p.x * 4))] += 1.0;
    ratio += p.u / (1.0 + p.x * p.x);
  }
  for (int i = 0; i < 4; ++i)
    CHECK(counts[i] / pts.size() == doctest::Approx(mass(i / 4.0, (i + 1) / 4.0)).epsilon(0.02));
  CHECK(ratio / pts.size() == doctest::Approx(0.5).epsilon(0.01));
  CHECK(s.sample_invariant(10, 5)[7].x == s.sample_invariant(10, 5)[7].x);
}

TEST_CASE("constant roof gives a pure cosine") {
  const SuspensionSemiflow s(RoofFunction::constant(doubling(), Rational(1)), lebesgue());
  const auto series = correlation(s, cos_u, cos_u, {0.0, 0.1, 3.0}, {20000, 50, 42});
  REQUIRE(series.values.size() == 31);
  for (std::size_t k = 0; k < series.values.size(); ++k)
    CHECK(series.values[k] == doctest::Approx(0.5 * std::cos(2 * std::numbers::pi * series.times[k])).epsilon(0.03));
  CHECK(fit_rate(series).verdict == DecayVerdict::NoDecay);
}

TEST_CASE("rate fit") {
  CorrelationSeries synth;
  Rng rng(9);
  for (int k = 0; k <= 100; ++k) {
    const double t = 0.1 * k;
    synth.times.push_back(t);
    synth.values.push_back(0.5 * std::exp(-0.7 * t) + 1e-4 * (2.0 * rng.uniform() - 1.0));
    synth.std_errors.push_back(1e-4);
  }
  const auto fit = fit_rate(synth);
  CHECK(fit.verdict == DecayVerdict::Decay);
  CHECK(fit.decay_rate == doctest::Approx(0.7).epsilon(0.05 / 0.7));
  CHECK(fit.r_squared >= 0.99);
  CHECK(fit.prefactor == doctest::Approx(0.5).epsilon(0.1));
  CHECK(fit.window_lo == 0.0);

  CorrelationSeries zero = synth;
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  CHECK_THROWS_AS(fit_rate(zero), WindowTooShort);

  CHECK(student_t_975(10) == doctest::Approx(2.228139).epsilon(1e-4));
  CHECK(student_t_975(30) == doctest::Approx(2.042272).epsilon(1e-6));
  CHECK(student_t_975(1e6) == doctest::Approx(1.959966).epsilon(1e-6));
}

TEST_CASE("temporal distance") {
  const auto f = doubling();
  // 1 + x: r(h x) - r(h y) = (x - y)/2 on both branches, so every bracket closes.
  const auto lin = RoofFunction::polynomial(f, {Rational(1), Rational(1)});
  CHECK(temporal_distance_grid(lin, 0, 16, 30).max_abs <= 1e-12);
  const auto cell = RoofFunction::cellwise_constant(f, {Rational(1), Rational(2)});
  CHECK(temporal_distance_grid(cell, 1, 16, 30).max_abs == 0.0);

  const auto g30 = temporal_distance_grid(xsq(), 0, 16, 30);
  const auto g40 = temporal_distance_grid(xsq(), 0, 16, 40);
  CHECK(g30.max_abs > 1e-3);
  CHECK((g30.values - g40.values).cwiseAbs().maxCoeff() <= g30.truncation_bound + 1e-12);
  CHECK(g30.truncation_bound <= 1e-8);

  const auto [a, b] = contrasting_pasts(*f, 0, 4);
  CHECK(a.branches == Itinerary{0, 1, 1, 0});
  CHECK(b.branches == Itinerary{1, 0, 0, 1});
  CHECK_THROWS_AS(temporal_distance(xsq(), 0.2, 0.7, a, b, 4), BracketUndefined);
  // Antisymmetric in (x, y).
  const double xy = temporal_distance(xsq(), 0.1, 0.3, a, b, 4).value;
  CHECK(temporal_distance(xsq(), 0.3, 0.1, a, b, 4).value == doctest::Approx(-xy));
}

TEST_CASE("correlation matches the quadrature oracle") {
  // tools/oracles.py: rho(0) = 1.2411337, rho(1/2) = -0.6724974 for the
  // default observable under roof 1 + x^2.
  const SuspensionSemiflow s(xsq(), lebesgue());
  const auto phi = default_observable(s);
  const auto series = correlation(s, phi, phi, {0.0, 0.5, 0.5}, {400000, 100, 7});
  REQUIRE(series.values.size() == 2);
  CHECK(std::abs(series.values[0] - 1.2411337) <= 4 * series.std_errors[0]);
  CHECK(std::abs(series.values[1] + 0.6724974) <= 4 * series.std_errors[1]);
  CHECK(series.std_errors[0] < 3e-3);

  // Same seed and size, any worker count: identical numbers.
  set_thread_count(1);
  const auto one = correlation(s, phi, phi, {0.0, 0.5, 2.0}, {20000, 20, 5});
  set_thread_count(4);
  const auto four = correlation(s, phi, phi, {0.0, 0.5, 2.0}, {20000, 20, 5});
  set_thread_count(std::thread::hardware_concurrency());
  CHECK(one.values == four.values);
  CHECK(one.std_errors == four.std_errors);
}
