#include <doctest.h>

#include <cmath>

#include "mixlab/induced.hpp"
#include "mixlab/markov_map.hpp"

using namespace mixlab;

TEST_CASE("doubling evaluation") {
  const auto f = models::doubling();
  auto e = f.evaluate(0.3);
  CHECK(e.image == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(e.branch == 0);
  e = f.evaluate(0.75);
  CHECK(e.image == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(e.branch == 1);
  CHECK_THROWS_AS(f.evaluate(0.5), BoundaryPoint);
  CHECK_THROWS_AS(f.evaluate(1.5), DomainError);
}

TEST_CASE("three-branch evaluation at 1/2 uses the middle branch") {
  const auto f = models::three_branch();
  const auto e = f.evaluate(0.5);
  CHECK(e.branch == 1);
  CHECK(e.image == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(f.evaluate(1.0 / 3.0 + 0.0), BoundaryPoint);
}

TEST_CASE("axiom validation") {
  const auto f = models::doubling();
  auto rep = validate_axioms(f, 10000);
  CHECK(rep.all_pass());
  CHECK(rep.at("expansion").worst_probe == doctest::Approx(0.5));

  rep = validate_axioms(f.with_bounds(0.4, 0.0), 1000);
  CHECK_FALSE(rep.at("expansion").pass);

  rep = validate_axioms(models::three_branch(), 10000);
  CHECK(rep.all_pass());
  CHECK(rep.at("expansion").worst_probe == doctest::Approx(0.5));

  rep = validate_axioms(models::perturbed_doubling(0.3), 2000);
  CHECK(rep.all_pass());
}

TEST_CASE("periodic points") {
  const auto f = models::doubling();
  CHECK(periodic_point(f, {0, 0, 1, 1}) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(periodic_point(f, {0, 1}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(periodic_point(f, {0}) == 0.0);
  CHECK(periodic_point(*f.exact(), Itinerary{0, 0, 1, 1}) == Rational(1, 5));
  CHECK(periodic_point(*f.exact(), Itinerary{0, 1}) == Rational(1, 3));

  const auto g = models::three_branch();
  CHECK_THROWS_AS(periodic_point(g, {0, 0}), InadmissibleItinerary);

  const auto p = models::perturbed_doubling(0.4);
  for (const Itinerary& w : {Itinerary{0, 1}, Itinerary{0, 0, 1}, Itinerary{1, 1, 0, 1, 0}}) {
    const double x = periodic_point(p, w);
    CHECK(periodic_residual(p, w, x) <= 1e-12);
  }
}

TEST_CASE("first return inducing, doubling") {
  const auto f = models::doubling();
  const auto ind = induce_first_return<Rational>(*f.exact(), 0, 3);
  // R=1: [0,1/4); R=2: [1/4,3/8); R=3: [3/8,7/16).
  REQUIRE(ind.cells.size() == 3);
  CHECK(ind.cells[0].return_time == 1);
  CHECK(ind.cells[0].cell.lo == Rational(0));
  CHECK(ind.cells[0].cell.hi == Rational(1, 4));
  CHECK(ind.cells[2].return_time == 3);
  CHECK(ind.cells[2].cell.length() == Rational(1, 16));
  CHECK(ind.residual_mass() == Rational(1, 8));

  const auto st = tail_statistics(to_double(induce_first_return<double>(f, 0, 20)));
  CHECK(st.alpha == doctest::Approx(std::log(2.0)).epsilon(0.1));
  CHECK(full_branch_defect(f, induce_first_return<double>(f, 0, 12)) <= 1e-12);
}

TEST_CASE("first return inducing, three-branch model") {
  const auto f = models::three_branch();
  const auto ind = induce_first_return<Rational>(*f.exact(), 0, 12);
  for (int n = 2; n <= 13; ++n) {
    Rational expected(1);
    for (int k = 0; k < n - 2; ++k) expected = expected * Rational(2, 3);
    CHECK(ind.tail[static_cast<std::size_t>(n)] == expected);
  }
  for (std::size_t n = 1; n < ind.tail.size(); ++n) CHECK(ind.tail[n] <= ind.tail[n - 1]);
  const auto st = tail_statistics(to_double(ind));
  CHECK(st.alpha == doctest::Approx(std::log(1.5)).epsilon(0.1));
  CHECK(st.sigma0 > 0.0);
  CHECK(full_branch_defect(*f.exact(), ind) == 0.0);
  CHECK(full_branch_defect(f, induce_first_return<double>(f, 0, 6)) <= 1e-12);
}

TEST_CASE("degenerate and failing inducing") {
  const auto f = models::doubling();
  const auto ind = induce_first_return<double>(f, 0, 1);
  CHECK(ind.cells.size() == 1);
  CHECK_THROWS_AS(tail_statistics(to_double(induce_first_return<double>(f, 0, 3))), InsufficientDepth);

  // Every point returns at once: no excursion mass at any depth.
  InducedMap<double> immediate;
  immediate.depth_cap = 6;
  immediate.tail = {1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  CHECK(tail_statistics(immediate).degenerate());

  CHECK_THROWS_AS(induce_first_return<double>(models::three_branch(), 3, 4), std::invalid_argument);
}

TEST_CASE("refinement") {
  const auto f = refine(models::three_branch(), 1);
  double total = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) total += f.cell(k).length();
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(validate_axioms(f, 500).all_pass());
}
