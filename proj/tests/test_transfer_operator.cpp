#include <doctest.h>

#include <cmath>

#include "mixlab/polynomial.hpp"
#include "mixlab/quadrature.hpp"
#include "mixlab/random.hpp"
#include "mixlab/transfer_operator.hpp"

using namespace mixlab;

namespace {
MapPtr share(ExpandingMarkovMap m) { return std::make_shared<const ExpandingMarkovMap>(std::move(m)); }

Polynomial<double> random_cubic(Rng& rng) {
  return Polynomial<double>({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
}
}  // namespace

TEST_CASE("exact transfer operator") {
  const auto f = models::doubling();
  CHECK(apply_exact(f, [](double) { return 1.0; }, 0.3) == doctest::Approx(1.0));
  for (double x : {0.1, 0.37, 0.8}) CHECK(apply_exact(f, [](double y) { return y; }, x) == doctest::Approx(x / 2 + 0.25));
  const auto g = models::three_branch();
  CHECK(apply_exact(g, [](double) { return 1.0; }, 0.9) == doctest::Approx(7.0 / 6.0));
  CHECK(apply_exact(g, [](double) { return 1.0; }, 0.2) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(apply_exact(g, [](double) { return 1.0; }, 1.0 / 3.0), BoundaryPoint);
}

TEST_CASE("mass conservation and positivity") {
  const auto f = models::three_branch();
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    const auto v = random_cubic(rng);
    const GaussLegendre gl(8);
    const double before = gl.integrate([&](double x) { return v(x); }, 0.0, 1.0, 3);
    const RealFunction vf = [&](double y) { return v(y); };
    const double after = gl.integrate([&](double x) { return apply_exact(f, vf, x); }, 0.0, 1.0, 3);
    CHECK(std::abs(before - after) <= 1e-8);
  }
  for (int i = 0; i < 1000; ++i) {
    const double x = van_der_corput(static_cast<std::uint64_t>(i));
    if (std::abs(x - 1.0 / 3.0) < 1e-15) continue;
    CHECK(apply_exact(f, [](double y) { return y * y; }, x) >= 0.0);
  }
}

TEST_CASE("Ulam assembly") {
  auto op = build_ulam(share(models::doubling()), 2);
  Eigen::MatrixXd m(op.matrix);
  CHECK(m.isApprox(Eigen::MatrixXd::Constant(2, 2, 0.5)));
  op = build_ulam(share(models::doubling()), 4);
  m = Eigen::MatrixXd(op.matrix);
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(std::abs(m.row(i).sum() - 1.0) <= 1e-12);
    CHECK((m.row(i).array() == 0.5).count() == 2);
  }
  CHECK_THROWS_AS(build_ulam(share(models::doubling()), 3), BinMisalignment);
  CHECK_THROWS_AS(build_ulam(share(models::three_branch()), 4), BinMisalignment);

  const auto pd = build_ulam(share(models::perturbed_doubling(0.5)), 256);
  const Eigen::MatrixXd d(pd.matrix);
  CHECK((d.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
  CHECK(d.minCoeff() >= 0.0);
}

TEST_CASE("invariant densities") {
  const auto op = build_ulam(share(models::doubling()), 1024);
  const auto dens = invariant_density(op);
  CHECK(dens.residual <= 1e-10);
  CHECK((dens.values.array() - 1.0).abs().maxCoeff() <= 1e-8);
  CHECK(std::abs(dens.leading_eigenvalue - 1.0) <= 1e-10);

  // Exact 3x3 oracle: cell masses (1/4, 3/8, 3/8), densities (3/4, 9/8, 9/8).
  const auto tb = invariant_density(build_ulam(share(models::three_branch()), 3));
  CHECK(tb.values(0) == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(tb.values(1) == doctest::Approx(1.125).epsilon(1e-9));
  CHECK(tb.values(2) == doctest::Approx(1.125).epsilon(1e-9));
  const auto tb99 = invariant_density(build_ulam(share(models::three_branch()), 99));
  CHECK(tb99.values.minCoeff() > 0.0);
  CHECK(tb99.value_at(0.1) == doctest::Approx(0.75).epsilon(1e-8));
  CHECK(tb99.value_at(0.9) == doctest::Approx(1.125).epsilon(1e-8));
  CHECK(tb99.quantile(0.25) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));

  // Nonlinear map: densities at N and 2N agree to O(1/N).
  const auto a = invariant_density(build_ulam(share(models::perturbed_doubling(0.4)), 256));
  const auto b = invariant_density(build_ulam(share(models::perturbed_doubling(0.4)), 512));
  double l1 = 0.0;
  for (std::size_t i = 0; i < 512; ++i) l1 += std::abs(b.values(static_cast<Eigen::Index>(i)) - a.values(static_cast<Eigen::Index>(i / 2))) / 512.0;
  CHECK(l1 * 256 < 5.0);
  CHECK(a.values.minCoeff() > 0.0);
}

TEST_CASE("duality") {
  const auto f = models::doubling();
  auto r = duality_check(f, [](double) { return 1.0; }, [](double) { return 1.0; });
  CHECK(r.discrepancy <= 1e-14);
  r = duality_check(f, [](double x) { return x; }, [](double x) { return x; });
  CHECK(r.lhs == doctest::Approx(7.0 / 24.0).epsilon(1e-13));
  CHECK(r.discrepancy <= 1e-6);

  Rng rng(11);
  for (int t = 0; t < 20; ++t) {
    const auto g = random_cubic(rng), v = random_cubic(rng);
    CHECK(duality_check(f, [&](double x) { return g(x); }, [&](double x) { return v(x); }).discrepancy <= 1e-6);
  }

  const auto tb = models::three_branch();
  const auto dens = invariant_density(build_ulam(share(tb), 3));
  const auto d = duality_check(tb, [](double x) { return std::cos(x); }, [](double x) { return 1 + x; }, 64, &dens);
  CHECK(d.discrepancy <= 1e-9);
}

TEST_CASE("spectral gap") {
  const auto two = build_ulam(share(models::doubling()), 2);
  CHECK(spectral_gap(two, invariant_density(two)).second_modulus == 0.0);

  // Dyadic Ulam matrices of the doubling map are nilpotent off the constants.
  const auto small = build_ulam(share(models::doubling()), 64);
  const auto spec = dense_spectrum(small);
  CHECK(spec[0] == doctest::Approx(1.0));
  CHECK(spec[1] < 0.01);
  const auto big = build_ulam(share(models::doubling()), 1024);
  const auto gap = spectral_gap(big, invariant_density(big));
  CHECK(gap.second_modulus <= 1.0);
  CHECK(std::abs(gap.second_modulus - spec[1]) < 0.01);
  CHECK(gap.smooth_rate == doctest::Approx(0.5).epsilon(0.02));

  const auto pd = build_ulam(share(models::perturbed_doubling(0.5)), 256);
  const auto g2 = spectral_gap(pd, invariant_density(pd));
  CHECK(g2.second_modulus <= 1.0);
  CHECK(g2.gap > 0.0);
}
