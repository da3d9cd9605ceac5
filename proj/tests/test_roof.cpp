#include <doctest.h>

#include <cmath>

#include "mixlab/roof.hpp"

using namespace mixlab;

namespace {

MapPtr doubling() { return std::make_shared<const ExpandingMarkovMap>(models::doubling()); }

RoofFunction one_plus_xsq() { return RoofFunction::polynomial(doubling(), {Rational(1), Rational(0), Rational(1)}); }
RoofFunction one_plus_x() { return RoofFunction::polynomial(doubling(), {Rational(1), Rational(1)}); }

}  // namespace

TEST_CASE("birkhoff sums") {
  const auto r = one_plus_xsq();
  CHECK(birkhoff_sum_exact(r, Rational(1, 5), 4) == Rational(26, 5));
  CHECK(birkhoff_sum_exact(r, Rational(1, 3), 4) == Rational(46, 9));
  CHECK(birkhoff_sum(r, 0.2, 4) == doctest::Approx(5.2).epsilon(1e-14));
  CHECK(birkhoff_sum(r, 0.7, 0) == 0.0);
  CHECK(orbit_sum(r, {0, 0, 1, 1}, 0.2) == doctest::Approx(5.2).epsilon(1e-14));
}

TEST_CASE("roof bounds and validation") {
  const auto r = one_plus_xsq();
  CHECK(r.lower_bound() == doctest::Approx(1.0));
  CHECK(r.upper_bound() == doctest::Approx(2.0).epsilon(1e-6));
  // |D(r o h)| = |2h(y) h'(y)| <= 2 * 1 * 1/2.
  CHECK(r.branch_lipschitz() == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(validate_roof(r).all_pass());
  CHECK_FALSE(validate_roof(r.with_bounds(1.0, 2.0, 0.5), 1000).all_pass());
  CHECK_FALSE(validate_roof(r.with_bounds(1.5, 2.0, 1.0), 1000).all_pass());
  CHECK_THROWS_AS(RoofFunction::polynomial(doubling(), {Rational(-1), Rational(1)}), ModelError);

  const auto trig = RoofFunction::trigonometric(doubling(), 2.0, {0.5}, {0.25});
  CHECK(validate_roof(trig, 2000).all_pass());
  CHECK_FALSE(trig.has_exact_path());
}

TEST_CASE("lyndon enumeration") {
  const auto f = models::doubling();
  // Binary Lyndon words: 2, 1, 2, 3, 6, 9 of lengths 1..6.
  CHECK(admissible_lyndon_words(f, 6).size() == 23);
  const auto g = models::three_branch();
  for (const auto& w : admissible_lyndon_words(g, 5)) CHECK_NOTHROW(require_admissible(g, w));
}

TEST_CASE("witness for 1 + x^2") {
  const auto rep = witness_search(one_plus_xsq(), 4);
  REQUIRE(rep.verdict == CohomologyVerdict::WitnessFound);
  CHECK(rep.exact);
  CHECK(rep.witness_period == 4);
  const auto& w = *rep.witness;
  CHECK(w.first == Itinerary{0, 0, 1, 1});
  CHECK(w.second == Itinerary{0, 1, 0, 1});
  CHECK(*w.exact_sum1 == Rational(26, 5));
  CHECK(*w.exact_sum2 == Rational(46, 9));
  CHECK(*w.exact_gap == Rational(4, 45));

  const auto fl = witness_search(one_plus_xsq(), 4, {1e-10, false});
  REQUIRE(fl.witness);
  CHECK(std::abs(fl.witness->gap - 4.0 / 45.0) <= 1e-12);
}

TEST_CASE("coboundary roofs have no witness") {
  const auto r = one_plus_x();
  const auto cert = certify_coboundary(r, [](double x) { return x; }, 10000);
  CHECK(cert.deviation <= 1e-12);
  for (int p = 2; p <= 8; ++p) CHECK(witness_search(r, p).verdict == CohomologyVerdict::NoWitnessUpToPeriod);
  CHECK(witness_search(RoofFunction::constant(doubling(), Rational(3, 2)), 8).verdict ==
        CohomologyVerdict::NoWitnessUpToPeriod);
  CHECK(certify_coboundary(RoofFunction::constant(doubling(), Rational(1)), [](double) { return 0.0; }).deviation == 0.0);
}

TEST_CASE("coboundary deviation of x^2") {
  const auto cert = certify_coboundary(one_plus_xsq(), [](double) { return 0.0; }, 10000);
  CHECK(cert.branch_oscillation[0] == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(cert.branch_oscillation[1] == doctest::Approx(0.75).epsilon(1e-3));
}

TEST_CASE("bump perturbation forces a witness") {
  const auto base = RoofFunction::constant(doubling(), Rational(1));
  const auto orbit = orbit_points(base.base(), {0, 1});
  const auto bumped = perturb_bump(base, 0.2, 0.02, 0.1, orbit);
  const auto rep = witness_search(bumped, 4);
  REQUIRE(rep.witness);
  CHECK(rep.witness_period == 4);
  CHECK(rep.witness->gap == doctest::Approx(0.1).epsilon(1e-12));

  CHECK(bumped(0.7) == base(0.7));
  CHECK(bumped(0.219) > 1.0);
  CHECK(bumped.lower_bound() >= base.lower_bound() - 0.1);
  CHECK(validate_roof(bumped, 10000).all_pass());

  const auto same = perturb_bump(base, 0.2, 0.02, 0.0, orbit);
  CHECK(same(0.2) == 1.0);
  CHECK_THROWS_AS(perturb_bump(base, 1.0 / 3.0, 0.02, 0.1, orbit), ProtectedOrbitHit);
  CHECK_THROWS_AS(perturb_bump(base, 0.2, 0.02, 1.5, orbit), ModelError);
}

TEST_CASE("locally constant roof and witness soundness on three-branch map") {
  auto g = std::make_shared<const ExpandingMarkovMap>(models::three_branch());
  const auto cw = RoofFunction::cellwise_constant(g, {Rational(1), Rational(2), Rational(3)});
  CHECK(witness_search(cw, 7).verdict == CohomologyVerdict::NoWitnessUpToPeriod);
  const auto poly = RoofFunction::polynomial(g, {Rational(1), Rational(0), Rational(1)});
  const auto rep = witness_search(poly, 8);
  if (rep.witness) {
    std::vector<int> a(3, 0), b(3, 0);
    for (int k : rep.witness->first) ++a[static_cast<std::size_t>(k)];
    for (int k : rep.witness->second) ++b[static_cast<std::size_t>(k)];
    CHECK(a == b);
    CHECK(rep.witness->first != rep.witness->second);
  }
}
