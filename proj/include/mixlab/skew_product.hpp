#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <optional>

#include "mixlab/markov_map.hpp"
#include "mixlab/transfer_operator.hpp"

namespace mixlab {

/// Fiber coordinate; at most four components, stored inline.
using FiberPoint = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
using FiberMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

/// The fiber space: a closed Euclidean ball.
struct FiberBall {
  FiberPoint center;
  double radius = 1.0;

  Eigen::Index dimension() const { return center.size(); }
  double diameter() const { return 2.0 * radius; }
  bool contains(const FiberPoint& z, double slack = 1e-12) const { return (z - center).norm() <= radius + slack; }
};

struct SkewPoint {
  double x = 0.0;
  FiberPoint z;
};

/// Observable on the product, v(x, z).
using SkewObservable = std::function<double(double x, const FiberPoint& z)>;

/// F^(x, z) = (f x, G(x, z)) with G a kappa-contraction of the fiber ball.
class HyperbolicSkewProduct {
 public:
  /// G evaluated on branch k (x in the closure of cell k).
  using FiberMap = std::function<FiberPoint(std::size_t k, double x, const FiberPoint& z)>;
  using FiberOffset = std::function<FiberPoint(std::size_t k, double x)>;

  HyperbolicSkewProduct(MapPtr base, FiberBall omega, FiberMap fiber, double kappa,
                        std::optional<FiberPoint> origin = std::nullopt);

  /// G(x, z) = A z + offset(x) with constant A; enables fast disintegration.
  static HyperbolicSkewProduct affine(MapPtr base, FiberBall omega, FiberMatrix linear, FiberOffset offset,
                                      double kappa, std::optional<FiberPoint> origin = std::nullopt);

  const ExpandingMarkovMap& base() const { return *base_; }
  const MapPtr& base_ptr() const { return base_; }
  const FiberBall& omega() const { return omega_; }
  double kappa() const { return kappa_; }
  const FiberPoint& origin() const { return origin_; }
  bool is_affine() const { return linear_.has_value(); }
  const FiberMatrix& linear() const { return *linear_; }
  FiberPoint offset(std::size_t k, double x) const { return (*offset_)(k, x); }

  FiberPoint fiber(std::size_t k, double x, const FiberPoint& z) const { return fiber_(k, x, z); }

  /// Throws BoundaryPoint on a shared endpoint and FiberEscape if the image
  /// leaves the ball.
  SkewPoint apply(const SkewPoint& w) const;

  HyperbolicSkewProduct with_origin(FiberPoint origin) const;
  HyperbolicSkewProduct with_kappa(double kappa) const;

 private:
  MapPtr base_;
  FiberBall omega_;
  FiberMap fiber_;
  double kappa_;
  FiberPoint origin_;
  std::optional<FiberMatrix> linear_;
  std::optional<FiberOffset> offset_;
};

using SkewPtr = std::shared_ptr<const HyperbolicSkewProduct>;

/// Product metric max(|x - x'|, |z - z'|).
double product_distance(const SkewPoint& a, const SkewPoint& b);

struct ContractionReport {
  double worst_ratio = 0.0;
  std::size_t pairs = 0;
  std::size_t violations = 0;  ///< pairs with ratio above kappa
  double worst_radius = 0.0;   ///< largest |G(x,z) - center| seen
  bool invariance = true;      ///< every image stayed in the ball

  bool pass() const { return violations == 0 && invariance; }
};

/// Same-fiber pairs: x by van der Corput per branch, z1, z2 uniform in the
/// ball from a fixed seed.
ContractionReport validate_contraction(const HyperbolicSkewProduct& skew, std::size_t pairs, std::uint64_t seed = 1);

struct EtaValue {
  double value = 0.0;
  double error_bound = 0.0;  ///< kappa^n * Lip_z(v) * diam(Omega)
  std::size_t leaves = 0;
};

struct SandwichEstimate {
  double lower = 0.0;        ///< int (v_n)_- dnu
  double upper = 0.0;        ///< int (v_n)_+ dnu
  double gap() const { return upper - lower; }
};

/// eta_x(v) = lim (L^n v_n)(x), v_n = v o F^n(., origin), over the n-fold
/// inverse-branch tree of the base with transfer weights w.r.t. nu.
class Disintegration {
 public:
  static constexpr double kNodeBudget = 2e6;

  /// Throws DepthOverflow if some x has more than kNodeBudget n-fold
  /// preimages. A null density means nu = m.
  Disintegration(SkewPtr skew, int depth, std::shared_ptr<const InvariantDensity> density = nullptr);

  const HyperbolicSkewProduct& skew() const { return *skew_; }
  int depth() const { return depth_; }
  double leaf_count() const { return leaves_; }

  EtaValue operator()(double x, const SkewObservable& v, double fiber_lipschitz = 0.0) const;
  /// Several observables over one traversal.
  std::vector<EtaValue> evaluate(double x, const std::vector<SkewObservable>& vs,
                                 const std::vector<double>& fiber_lipschitz = {}) const;

  /// sup and inf of v over the image of the whole ball, sampled at the centre
  /// and 8 boundary points per 2-plane, summed with the same weights.
  std::pair<double, double> envelope(double x, const SkewObservable& v) const;

  double density(double x) const;

 private:
  struct Leaf;
  template <typename Visit>
  void traverse(double x, Visit&& visit) const;

  SkewPtr skew_;
  int depth_;
  std::shared_ptr<const InvariantDensity> density_;
  double leaves_ = 0.0;
  std::vector<FiberMatrix> powers_;  // A^0 .. A^depth for affine fibers
};

/// int eta_x(v) dnu(x) by Gauss-Legendre on `panels` panels per cell.
double eta_integral(const Disintegration& dis, const SkewObservable& v, std::size_t panels = 8, std::size_t order = 4);

/// Same quadrature applied to the fiberwise envelopes of v_n.
SandwichEstimate sandwich(const Disintegration& dis, const SkewObservable& v, std::size_t panels = 8,
                          std::size_t order = 4);

struct SmoothnessReport {
  double max_slope = 0.0;
  double scale = 0.0;               ///< sup|v| + sup|Dv|
  double empirical_constant = 0.0;  ///< max_slope / scale
  double constant = 0.0;            ///< configured C
  bool pass() const { return max_slope <= constant * scale; }
};

/// Max |eta_{x+h}(v) - eta_x(v)| / h over `grid` cell-interior points.
SmoothnessReport smoothness_probe(const Disintegration& dis, const SkewObservable& v, double sup_v, double sup_dv,
                                  std::size_t grid, double h = 1e-4, double constant = 10.0);

}  // namespace mixlab
