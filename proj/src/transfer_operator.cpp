#include "mixlab/transfer_operator.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "mixlab/parallel.hpp"
#include "mixlab/quadrature.hpp"
#include "mixlab/random.hpp"

namespace mixlab {
namespace {

using RowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// y = A x with rows split across workers; each row sums in storage order.
void multiply(const RowMatrix& a, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  y.resize(a.rows());
  const auto rows = static_cast<std::size_t>(a.rows());
  auto row = [&](std::size_t i) {
    double acc = 0.0;
    for (RowMatrix::InnerIterator it(a, static_cast<Eigen::Index>(i)); it; ++it) acc += it.value() * x(it.col());
    y(static_cast<Eigen::Index>(i)) = acc;
  };
  if (rows < 8192) {
    for (std::size_t i = 0; i < rows; ++i) row(i);
    return;
  }
  constexpr std::size_t block = 1024;
  parallel_for((rows + block - 1) / block, [&](std::size_t b) {
    for (std::size_t i = b * block; i < std::min(rows, (b + 1) * block); ++i) row(i);
  });
}

}  // namespace

double apply_exact(const ExpandingMarkovMap& map, const RealFunction& v, double x) {
  const Cell dom = map.domain();
  if (x < dom.lo || x > dom.hi) throw DomainError("apply_exact: point outside the domain");
  double total = 0.0;
  for (std::size_t k = 0; k < map.size(); ++k) {
    const Cell img = map.image(k);
    const bool inner_lo = img.lo > dom.lo && x == img.lo;
    const bool inner_hi = img.hi < dom.hi && x == img.hi;
    if (inner_lo || inner_hi)
      throw BoundaryPoint("apply_exact: x is an endpoint of the image of branch " + std::to_string(k));
    if (x < img.lo || x > img.hi) continue;
    const double y = map.inverse(k, x);
    total += v(y) / std::abs(map.derivative(k, y));
  }
  return total;
}

UlamOperator build_ulam(MapPtr map, std::size_t bins) {
  if (!map) throw std::invalid_argument("build_ulam: null map");
  if (bins < map->size())
    throw BinMisalignment("build_ulam: " + std::to_string(bins) + " bins cannot refine " +
                          std::to_string(map->size()) + " partition cells");
  UlamOperator op;
  op.map = map;
  op.bins = bins;
  op.domain = map->domain();
  const double width = op.bin_width();

  // Every partition breakpoint must be a bin edge.
  std::vector<std::size_t> first_bin(map->size() + 1);
  for (std::size_t k = 0; k <= map->size(); ++k) {
    const double bp = k < map->size() ? map->cell(k).lo : map->cell(k - 1).hi;
    const double pos = (bp - op.domain.lo) / width;
    const double nearest = std::round(pos);
    if (std::abs(pos - nearest) > 1e-9)
      throw BinMisalignment("build_ulam: partition breakpoint " + std::to_string(bp) + " is not an edge of " +
                            std::to_string(bins) + " equal bins");
    first_bin[k] = static_cast<std::size_t>(nearest);
  }

  std::vector<std::vector<Eigen::Triplet<double>>> rows(bins);
  parallel_for(map->size(), [&](std::size_t k) {
    const Cell img = map->image(k);
    const bool increasing = map->derivative(k, 0.5 * (map->cell(k).lo + map->cell(k).hi)) > 0.0;
    for (std::size_t i = first_bin[k]; i < first_bin[k + 1]; ++i) {
      const double a = op.edge(i), b = op.edge(i + 1);
      double ya = map->forward(k, a), yb = map->forward(k, b);
      if (!increasing) std::swap(ya, yb);
      ya = std::max(ya, img.lo);
      yb = std::min(yb, img.hi);
      const auto j0 = static_cast<std::size_t>(std::clamp((ya - op.domain.lo) / width, 0.0, double(bins - 1)));
      std::vector<Eigen::Triplet<double>> row;
      double total = 0.0;
      for (std::size_t j = j0; j < bins && op.edge(j) < yb; ++j) {
        const double lo = std::max(op.edge(j), ya), hi = std::min(op.edge(j + 1), yb);
        if (!(hi > lo)) continue;
        // Preimage length of [lo, hi] inside bin i.
        const double mass = std::abs(map->inverse(k, hi) - map->inverse(k, lo));
        if (mass > 0.0) {
          row.emplace_back(static_cast<int>(i), static_cast<int>(j), mass);
          total += mass;
        }
      }
      for (auto& t : row) t = Eigen::Triplet<double>(t.row(), t.col(), t.value() / total);
      rows[i] = std::move(row);
    }
  });

  std::vector<Eigen::Triplet<double>> all;
  for (auto& r : rows) all.insert(all.end(), r.begin(), r.end());
  op.matrix.resize(static_cast<Eigen::Index>(bins), static_cast<Eigen::Index>(bins));
  op.matrix.setFromTriplets(all.begin(), all.end());
  op.matrix.makeCompressed();
  return op;
}

double InvariantDensity::value_at(double x) const {
  if (x < domain.lo || x > domain.hi) throw DomainError("density: point outside the domain");
  const auto i = std::min(static_cast<std::size_t>((x - domain.lo) / bin_width()), bins() - 1);
  return values(static_cast<Eigen::Index>(i));
}

double InvariantDensity::quantile(double u) const {
  if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("density quantile: u must lie in [0,1)");
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - cdf.begin()) - 1));
  const std::size_t bin = std::min(i, bins() - 1);
  const double mass = cdf[bin + 1] - cdf[bin];
  const double frac = mass > 0.0 ? (u - cdf[bin]) / mass : 0.0;
  return domain.lo + (static_cast<double>(bin) + std::clamp(frac, 0.0, 1.0)) * bin_width();
}

double InvariantDensity::integrate(const RealFunction& g, std::size_t order) const {
  const GaussLegendre gl(order);
  const double w = bin_width();
  double total = 0.0;
  for (std::size_t i = 0; i < bins(); ++i) {
    const double lo = domain.lo + w * static_cast<double>(i);
    total += values(static_cast<Eigen::Index>(i)) * gl.integrate(g, lo, lo + w);
  }
  return total;
}

InvariantDensity invariant_density(const UlamOperator& op, double tol, std::size_t max_iterations) {
  if (!(tol > 0.0)) throw std::invalid_argument("invariant_density: tolerance must be positive");
  const RowMatrix mt = op.matrix.transpose();
  const auto n = static_cast<Eigen::Index>(op.bins);
  Eigen::VectorXd p = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  Eigen::VectorXd next;

  InvariantDensity out;
  out.domain = op.domain;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    multiply(mt, p, next);
    next /= next.sum();
    out.residual = (next - p).lpNorm<1>();
    p.swap(next);
    out.iterations = it;
    if (out.residual <= tol) break;
  }
  if (out.residual > tol)
    throw NoConvergence("invariant_density: residual " + std::to_string(out.residual) + " after " +
                        std::to_string(max_iterations) + " iterations");

  multiply(mt, p, next);
  out.leading_eigenvalue = next.norm() / p.norm();
  out.values = p / op.bin_width();
  out.cdf.assign(op.bins + 1, 0.0);
  for (std::size_t i = 0; i < op.bins; ++i) out.cdf[i + 1] = out.cdf[i] + p(static_cast<Eigen::Index>(i));
  out.cdf.back() = 1.0;
  return out;
}

DualityResult duality_check(const ExpandingMarkovMap& map, const RealFunction& g, const RealFunction& v,
                            std::size_t panels, const InvariantDensity* density) {
  if (panels == 0) throw std::invalid_argument("duality_check: panels must be >= 1");
  const GaussLegendre gl(8);
  auto phi = [density](double x) { return density ? density->value_at(x) : 1.0; };

  DualityResult res;
  // Left side cell by cell so that g o f is smooth on every panel.
  for (std::size_t k = 0; k < map.size(); ++k) {
    const Cell c = map.cell(k);
    res.lhs += gl.integrate([&](double x) { return g(map.forward(k, x)) * v(x) * phi(x); }, c.lo, c.hi, panels);
  }
  // Right side: int g L(phi v) dm. Gauss nodes never hit image endpoints.
  const Cell dom = map.domain();
  const RealFunction weighted = [&](double y) { return phi(y) * v(y); };
  res.rhs = gl.integrate([&](double x) { return g(x) * apply_exact(map, weighted, x); }, dom.lo, dom.hi,
                         panels * map.size());
  res.discrepancy = std::abs(res.lhs - res.rhs);
  return res;
}

SpectralGap spectral_gap(const UlamOperator& op, const InvariantDensity& density, double tol,
                         std::size_t max_iterations) {
  const RowMatrix mt = op.matrix.transpose();
  const auto n = static_cast<Eigen::Index>(op.bins);
  const Eigen::VectorXd p = density.values * op.bin_width();  // right eigenvector, sums to 1

  // Deterministic start with no special symmetry.
  Eigen::VectorXd v(n), w;
  for (Eigen::Index i = 0; i < n; ++i) v(i) = van_der_corput(static_cast<std::uint64_t>(i)) - 0.5;
  auto deflate = [&](Eigen::VectorXd& x) { x -= p * x.sum(); };
  deflate(v);

  SpectralGap out;
  {
    Eigen::VectorXd u(n), uw;
    for (Eigen::Index i = 0; i < n; ++i) u(i) = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    deflate(u);
    const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::log2(static_cast<double>(n)) / 2));
    const double start = u.norm();
    for (std::size_t s = 0; s < steps; ++s) {
      multiply(mt, u, uw);
      deflate(uw);
      u.swap(uw);
    }
    out.smooth_rate = start > 0.0 ? std::pow(u.norm() / start, 1.0 / static_cast<double>(steps)) : 0.0;
  }
  // Triangular-weighted geometric mean of growth ratios over windows of
  // doubling length. Equal-modulus eigenvalue clusters make the ratios
  // periodic; the weighting damps that error like (period / window)^2.
  std::vector<double> log_ratio;
  std::size_t window = 32;
  double previous = -1.0;
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    const double norm = v.norm();
    if (norm < 1e-280) {
      out.second_modulus = 0.0;
      out.gap = 1.0;
      out.iterations = it;
      return out;
    }
    v /= norm;
    multiply(mt, v, w);
    deflate(w);
    const double growth = w.norm();
    if (growth == 0.0) {
      out.second_modulus = 0.0;
      out.gap = 1.0;
      out.iterations = it;
      return out;
    }
    log_ratio.push_back(std::log(growth));
    v.swap(w);
    out.iterations = it;
    if (log_ratio.size() == 2 * window) {
      double s = 0.0, weights = 0.0;
      for (std::size_t j = 0; j < window; ++j) {
        const double wt = static_cast<double>(std::min(j + 1, window - j));
        s += wt * log_ratio[window + j];
        weights += wt;
      }
      const double estimate = std::exp(s / weights);
      if (previous >= 0.0 && std::abs(estimate - previous) <= tol) {
        out.second_modulus = estimate;
        out.gap = 1.0 - estimate;
        return out;
      }
      previous = estimate;
      window *= 2;  // the first half of the history serves as burn-in
    }
  }
  throw NoConvergence("spectral_gap: no convergence after " + std::to_string(max_iterations) + " iterations");
}

std::vector<double> dense_spectrum(const UlamOperator& op) {
  const Eigen::MatrixXd dense(op.matrix);
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(dense, false);
  std::vector<double> moduli;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) moduli.push_back(std::abs(solver.eigenvalues()(i)));
  std::sort(moduli.begin(), moduli.end(), std::greater<>());
  return moduli;
}

}  // namespace mixlab
