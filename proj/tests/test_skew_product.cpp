#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mixlab/skew_product.hpp"
#include "mixlab/solenoid.hpp"

using namespace mixlab;

namespace {

const SolenoidModel& standard() {
  static const SolenoidModel m = build_solenoid({});
  return m;
}

FiberPoint point2(double a, double b) {
  FiberPoint z(2);
  z << a, b;
  return z;
}

double re(double, const FiberPoint& z) { return z(0); }

}  // namespace

TEST_CASE("solenoid skew map") {
  const auto& s = *standard().skew;
  auto w = s.apply({0.0, point2(0, 0)});
  CHECK(w.x == 0.0);
  CHECK(w.z(0) == doctest::Approx(0.25));
  CHECK(std::abs(w.z(1)) < 1e-15);
  w = s.apply({0.5, point2(0, 0)});
  CHECK(w.x == 0.0);
  CHECK(w.z(0) == doctest::Approx(-0.25));
  CHECK(std::abs(w.z(1)) < 1e-15);
  CHECK_THROWS_AS(s.base().evaluate(0.5), BoundaryPoint);

  // Fiber contraction of a single step.
  const auto a = s.apply({0.3, point2(0.5, 0.1)}), b = s.apply({0.3, point2(-0.2, 0.4)});
  CHECK((a.z - b.z).norm() == doctest::Approx(0.05 * (point2(0.5, 0.1) - point2(-0.2, 0.4)).norm()));
  CHECK(product_distance(a, b) == doctest::Approx((a.z - b.z).norm()));
}

TEST_CASE("fiber escape is reported") {
  auto base = std::make_shared<const ExpandingMarkovMap>(models::doubling());
  FiberBall ball{FiberPoint::Zero(1), 1.0};
  const auto bad = HyperbolicSkewProduct(
      base, ball, [](std::size_t, double, const FiberPoint& z) -> FiberPoint { return z / 2 + FiberPoint::Constant(1, 0.9); },
      0.5);
  CHECK_THROWS_AS(bad.apply({0.2, FiberPoint::Constant(1, 0.8)}), FiberEscape);
  CHECK_FALSE(validate_contraction(bad, 100).invariance);
}

TEST_CASE("contraction validation") {
  const auto rep = validate_contraction(*standard().skew, 100000);
  CHECK(rep.worst_ratio == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(rep.violations == 0);
  CHECK(rep.invariance);
  CHECK(rep.worst_radius <= 0.3 + 1e-12);

  const auto strict = validate_contraction(standard().skew->with_kappa(1.0 / 30.0), 1000);
  CHECK_FALSE(strict.pass());
  CHECK(strict.worst_ratio == doctest::Approx(0.05).epsilon(1e-12));

  auto base = std::make_shared<const ExpandingMarkovMap>(models::doubling());
  const auto half = HyperbolicSkewProduct(
      base, {FiberPoint::Zero(1), 1.0}, [](std::size_t, double, const FiberPoint& z) -> FiberPoint { return z / 2; }, 0.5);
  const auto h = validate_contraction(half, 1000);
  CHECK(h.worst_ratio == doctest::Approx(0.5));
  CHECK(h.pass());
}

TEST_CASE("disintegration basics") {
  const Disintegration dis(standard().skew, 20);
  CHECK(dis.leaf_count() == doctest::Approx(1048576.0));
  CHECK_THROWS_AS(Disintegration(standard().skew, 21), DepthOverflow);

  for (int i = 0; i < 16; ++i) {
    const double theta = (i + 0.5) / 16.0;
    const auto vals = dis.evaluate(theta, {[](double, const FiberPoint&) { return 1.0; }, re}, {0.0, 1.0});
    CHECK(std::abs(vals[0].value - 1.0) <= 1e-9);
    CHECK(std::abs(vals[1].value) <= 1e-3);
    CHECK(vals[1].error_bound == doctest::Approx(std::pow(0.05, 20) * 2.0));
  }
}

TEST_CASE("disintegration of base observables and monotonicity") {
  const Disintegration dis(standard().skew, 8);
  const SkewObservable c = [](double x, const FiberPoint&) { return std::cos(2 * std::numbers::pi * x); };
  CHECK(dis(0.3, c).value == doctest::Approx(std::cos(0.6 * std::numbers::pi)));
  CHECK(std::abs(eta_integral(dis, c)) <= 1e-12);

  const SkewObservable v = [](double, const FiberPoint& z) { return z(0) * z(1); };
  const SkewObservable w = [](double, const FiberPoint& z) { return z(0) * z(1) + z.squaredNorm(); };
  for (double x : {0.1, 0.4, 0.77}) CHECK(dis(x, v).value <= dis(x, w).value + 1e-12);
  const auto [lo, hi] = dis.envelope(0.4, v);
  CHECK(lo <= dis(0.4, v).value);
  CHECK(dis(0.4, v).value <= hi);
}

TEST_CASE("origin insensitivity") {
  const int n = 6;
  const Disintegration a(standard().skew, n);
  const Disintegration b(std::make_shared<const HyperbolicSkewProduct>(standard().skew->with_origin(point2(0.6, -0.3))), n);
  const SkewObservable v = [](double, const FiberPoint& z) { return z(0) + 0.5 * z(1); };
  const double lip = std::sqrt(1.25);
  for (double x : {0.05, 0.3, 0.62, 0.9}) {
    const auto ea = a(x, v, lip), eb = b(x, v, lip);
    CHECK(std::abs(ea.value - eb.value) <= 2 * ea.error_bound);
  }
}

TEST_CASE("sandwich gap scales like kappa^n") {
  for (int n = 2; n <= 5; ++n) {
    const Disintegration dis(standard().skew, n);
    const auto s = sandwich(dis, re, 4, 4);
    const double bound = std::pow(0.05, n) * 1.0 * 2.0;
    CHECK(s.gap() <= bound * (1 + 1e-9));
    CHECK(s.gap() >= 0.5 * bound);
    const double eta = eta_integral(dis, re, 4, 4);
    CHECK(s.lower <= eta + 1e-15);
    CHECK(eta <= s.upper + 1e-15);
  }
}

TEST_CASE("invariance of eta") {
  const auto& skew = *standard().skew;
  const Disintegration dis(standard().skew, 10);
  const SkewObservable v = [](double x, const FiberPoint& z) {
    return z(0) * z(0) + std::cos(2 * std::numbers::pi * x) * z(1);
  };
  const SkewObservable vf = [&](double x, const FiberPoint& z) {
    const auto w = skew.apply({x, z});
    return v(w.x, w.z);
  };
  CHECK(eta_integral(dis, v, 8, 6) == doctest::Approx(eta_integral(dis, vf, 8, 6)).epsilon(1e-6));
}

TEST_CASE("smoothness probe") {
  // |z|^2 would be theta-independent by rotational symmetry.
  const SkewObservable sq = [](double, const FiberPoint& z) { return z(0) * z(0); };
  const Disintegration d16(standard().skew, 16), d20(standard().skew, 20);
  const auto r16 = smoothness_probe(d16, sq, 1.0, 2.0, 8, 1e-4);
  const auto r20 = smoothness_probe(d20, sq, 1.0, 2.0, 8, 1e-4);
  CHECK(r16.pass());
  CHECK(r16.max_slope > 0.01);
  CHECK(std::abs(r20.max_slope - r16.max_slope) <= 0.01 * r16.max_slope);
  // Refining h does not blow the slope up.
  const auto fine = smoothness_probe(d16, re, 1.0, 1.0, 8, 1e-5);
  const auto coarse = smoothness_probe(d16, re, 1.0, 1.0, 8, 1e-3);
  CHECK(fine.max_slope <= coarse.max_slope + 1e-6);
  CHECK(smoothness_probe(d16, [](double, const FiberPoint&) { return 1.0; }, 1.0, 0.0, 8).max_slope == 0.0);
}

TEST_CASE("solenoid geometry") {
  const auto& m = standard();
  CHECK(m.kappa() == 0.05);
  CHECK(m.image_radius() == doctest::Approx(0.3));
  CHECK_THROWS_AS(build_solenoid({2, 2.0, 0.9, 1.0}), GeometryViolation);
  CHECK_THROWS_AS(build_solenoid({2, 3.0, 0.1, 1.0}), GeometryViolation);
  CHECK_NOTHROW(build_solenoid({3, 20.0, 0.25, 1.0}));
  try {
    build_solenoid({2, 2.0, 0.9, 1.0});
  } catch (const GeometryViolation& e) {
    CHECK(std::string(e.what()).find("invariance") != std::string::npos);
  }
}

TEST_CASE("domination") {
  // 4 + (pi/2)^2 + 2/400 over c = 20; 4 + pi^2 + 2/100 over c = 10.
  const auto good = check_domination(standard());
  CHECK(good.pass);
  const double good_exact = (4 + std::pow(std::numbers::pi / 2, 2) + 2.0 / 400) / 20;
  CHECK(good.product >= good_exact);
  CHECK(good.product <= good_exact * (1 + 1e-3));
  CHECK(good.product <= 0.35);
  const auto bad = check_domination(build_solenoid({2, 10.0, 0.5, 1.0}));
  CHECK_FALSE(bad.pass);
  const double bad_exact = (4 + std::numbers::pi * std::numbers::pi + 0.02) / 10;
  CHECK(bad.product >= bad_exact);
  CHECK(bad.product <= bad_exact * (1 + 1e-3));
  double previous = 2.0;
  for (double c : {6.0, 10.0, 20.0, 40.0, 1000.0}) {
    const auto r = check_domination(build_solenoid({2, c, 0.25, 1.0}), 256);
    CHECK(r.product <= previous);
    previous = r.product;
  }
  CHECK(previous < 0.01);
}

TEST_CASE("attractor samples") {
  const auto& m = standard();
  const int burn = 30;
  const auto pts = attractor_sample(m, 2000, burn, 5);
  const double kappa = m.kappa(), rho = m.params.offset;
  const double bound = std::pow(kappa, 8) * rho / (1 - kappa) + std::pow(kappa, burn) + 1e-12;
  for (const auto& p : pts) {
    CHECK(p.z.norm() <= m.image_radius() + 1e-12);
    // Brute-force depth-8 tree of branch centres over p.x.
    double best = 1e9;
    for (int word = 0; word < 256; ++word) {
      double theta = p.x;
      FiberPoint c = FiberPoint::Zero(2);
      double scale = 1.0;
      for (int m8 = 0; m8 < 8; ++m8) {
        theta = (theta + ((word >> m8) & 1)) / 2.0;
        c += scale * point2(rho * std::cos(2 * std::numbers::pi * theta), rho * std::sin(2 * std::numbers::pi * theta));
        scale *= kappa;
      }
      best = std::min(best, (p.z - c).norm());
    }
    CHECK(best <= bound);
  }
  const auto again = attractor_sample(m, 2000, burn, 5);
  CHECK(again[1234].z == pts[1234].z);
}
