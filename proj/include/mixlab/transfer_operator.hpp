#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <functional>
#include <vector>

#include "mixlab/markov_map.hpp"

namespace mixlab {

using RealFunction = std::function<double(double)>;

/// (Lv)(x) = sum over inverse branches h covering x of v(h x) / |f'(h x)|,
/// the transfer operator with respect to Lebesgue measure. Throws
/// BoundaryPoint when x is an endpoint of some branch image inside the domain.
double apply_exact(const ExpandingMarkovMap& map, const RealFunction& v, double x);

/// Ulam discretization on N equal bins: M(i,j) = m(bin_i ∩ f^-1 bin_j) / m(bin_i).
struct UlamOperator {
  MapPtr map;
  std::size_t bins = 0;
  Cell domain;
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;

  double bin_width() const { return domain.length() / static_cast<double>(bins); }
  double edge(std::size_t i) const { return domain.lo + domain.length() * static_cast<double>(i) / static_cast<double>(bins); }
};

/// Entries come from pulling bins back through the monotone inverse branches,
/// so they are exact up to the inverse evaluation. Throws BinMisalignment if a
/// partition breakpoint is not a bin edge.
UlamOperator build_ulam(MapPtr map, std::size_t bins);

/// Piecewise-constant density on the Ulam bins.
struct InvariantDensity {
  Cell domain;
  Eigen::VectorXd values;    ///< density per bin; values.sum() * width == 1
  double residual = 0.0;     ///< ||M^T p - p||_1 on bin masses
  double leading_eigenvalue = 0.0;
  std::size_t iterations = 0;

  std::size_t bins() const { return static_cast<std::size_t>(values.size()); }
  double bin_width() const { return domain.length() / static_cast<double>(values.size()); }
  double value_at(double x) const;
  /// Inverse CDF; linear inside each bin. u in [0,1).
  double quantile(double u) const;
  /// Integral of g against the density, Gauss-Legendre per bin.
  double integrate(const RealFunction& g, std::size_t order = 8) const;

  std::vector<double> cdf;   ///< cumulative mass at bin edges, size bins + 1
};

/// Power iteration on M^T from the uniform vector.
InvariantDensity invariant_density(const UlamOperator& op, double tol = 1e-10, std::size_t max_iterations = 100000);

struct DualityResult {
  double lhs = 0.0;          ///< int g o f . v dnu
  double rhs = 0.0;          ///< int g . L_nu v dnu
  double discrepancy = 0.0;
};

/// Compares both sides of the duality relation by 8-point Gauss-Legendre on
/// `panels` equal panels. With a density the operator is L_nu v = L(phi v)/phi;
/// without one, nu = m.
DualityResult duality_check(const ExpandingMarkovMap& map, const RealFunction& g, const RealFunction& v,
                            std::size_t panels = 64, const InvariantDensity* density = nullptr);

struct SpectralGap {
  double second_modulus = 0.0;  ///< |lambda_2|
  double gap = 0.0;             ///< 1 - |lambda_2|
  std::size_t iterations = 0;
  /// Per-step decay of the deflated bin-centre coordinate x - mean over the
  /// first log2(N)/2 steps. Follows the operator on C^1 functions rather than
  /// the matrix, which can be nilpotent (dyadic bins under doubling).
  double smooth_rate = 0.0;
};

/// |lambda_2| of M^T by power iteration deflated against the invariant vector.
/// Estimates are triangular-weighted geometric means of the growth ratios over
/// windows 32, 64, 128, ...; stops when two successive ones differ by <= tol.
/// A ring of equal-modulus eigenvalues makes the ratios oscillate, so ask for
/// a looser tol there (1e-6 converges in ~16k steps on the three-branch map).
SpectralGap spectral_gap(const UlamOperator& op, const InvariantDensity& density, double tol = 1e-9,
                         std::size_t max_iterations = 100000);

/// Moduli of all eigenvalues of the dense Ulam matrix, descending. For small N.
std::vector<double> dense_spectrum(const UlamOperator& op);

}  // namespace mixlab
