#include "mixlab/skew_product.hpp"

#include <cmath>
#include <numbers>

#include "mixlab/parallel.hpp"
#include "mixlab/quadrature.hpp"
#include "mixlab/random.hpp"

namespace mixlab {

HyperbolicSkewProduct::HyperbolicSkewProduct(MapPtr base, FiberBall omega, FiberMap fiber, double kappa,
                                             std::optional<FiberPoint> origin)
    : base_(std::move(base)), omega_(std::move(omega)), fiber_(std::move(fiber)), kappa_(kappa) {
  if (!base_) throw ModelError("skew product needs a base map");
  if (omega_.dimension() < 1 || omega_.dimension() > 4) throw ModelError("fiber dimension must be 1..4");
  if (!(omega_.radius > 0.0)) throw ModelError("fiber ball radius must be positive");
  if (!(kappa_ > 0.0 && kappa_ < 1.0)) throw ModelError("fiber contraction kappa must lie in (0,1)");
  origin_ = origin.value_or(omega_.center);
  if (origin_.size() != omega_.dimension()) throw ModelError("fiber origin has the wrong dimension");
  if (!omega_.contains(origin_)) throw ModelError("fiber origin lies outside the fiber ball");
}

HyperbolicSkewProduct HyperbolicSkewProduct::affine(MapPtr base, FiberBall omega, FiberMatrix linear,
                                                    FiberOffset offset, double kappa,
                                                    std::optional<FiberPoint> origin) {
  if (linear.rows() != omega.dimension() || linear.cols() != omega.dimension())
    throw ModelError("affine fiber: linear part has the wrong shape");
  auto g = [linear, offset](std::size_t k, double x, const FiberPoint& z) -> FiberPoint {
    return linear * z + offset(k, x);
  };
  HyperbolicSkewProduct out(std::move(base), std::move(omega), g, kappa, std::move(origin));
  out.linear_ = std::move(linear);
  out.offset_ = std::move(offset);
  return out;
}

SkewPoint HyperbolicSkewProduct::apply(const SkewPoint& w) const {
  if (w.z.size() != omega_.dimension()) throw std::invalid_argument("apply: fiber point has the wrong dimension");
  SkewPoint out;
  try {
    const auto [image, k] = base_->evaluate(w.x);
    out = {image, fiber_(k, w.x, w.z)};
  } catch (const BoundaryPoint&) {
    // On a circle base both one-sided branches may agree; accept only then.
    const Cell dom = base_->domain();
    std::size_t right = 1;
    while (right < base_->size() && base_->cell(right).lo != w.x) ++right;
    if (right == base_->size()) throw;
    auto wrap = [&](double y) { return y >= dom.hi ? y - dom.length() : y; };
    const double left_image = wrap(base_->forward(right - 1, w.x));
    const double right_image = wrap(base_->forward(right, w.x));
    const FiberPoint zl = fiber_(right - 1, w.x, w.z), zr = fiber_(right, w.x, w.z);
    if (std::abs(left_image - right_image) > 1e-12 || (zl - zr).norm() > 1e-12) throw;
    out = {right_image, zr};
  }
  if (!omega_.contains(out.z))
    throw FiberEscape("fiber image at x = " + std::to_string(w.x) + " leaves the ball (|z - c| = " +
                      std::to_string((out.z - omega_.center).norm()) + ")");
  return out;
}

HyperbolicSkewProduct HyperbolicSkewProduct::with_origin(FiberPoint origin) const {
  HyperbolicSkewProduct copy = *this;
  if (origin.size() != omega_.dimension() || !omega_.contains(origin))
    throw ModelError("fiber origin must lie in the fiber ball");
  copy.origin_ = std::move(origin);
  return copy;
}

HyperbolicSkewProduct HyperbolicSkewProduct::with_kappa(double kappa) const {
  if (!(kappa > 0.0 && kappa < 1.0)) throw ModelError("fiber contraction kappa must lie in (0,1)");
  HyperbolicSkewProduct copy = *this;
  copy.kappa_ = kappa;
  return copy;
}

double product_distance(const SkewPoint& a, const SkewPoint& b) {
  return std::max(std::abs(a.x - b.x), (a.z - b.z).norm());
}

namespace {

FiberPoint uniform_in_ball(const FiberBall& ball, Rng& rng) {
  FiberPoint u(ball.dimension());
  do {
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = rng.uniform(-1.0, 1.0);
  } while (u.squaredNorm() > 1.0);
  return ball.center + ball.radius * u;
}

// Centre plus 8 boundary points in every coordinate 2-plane (2 per axis in 1D).
std::vector<FiberPoint> ball_samples(const FiberBall& ball) {
  std::vector<FiberPoint> out{ball.center};
  const Eigen::Index d = ball.dimension();
  if (d == 1) {
    FiberPoint e(1);
    e(0) = ball.radius;
    out.push_back(ball.center + e);
    out.push_back(ball.center - e);
    return out;
  }
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j)
      for (int a = 0; a < 8; ++a) {
        const double t = std::numbers::pi * a / 4.0;
        FiberPoint p = ball.center;
        p(i) += ball.radius * std::cos(t);
        p(j) += ball.radius * std::sin(t);
        out.push_back(p);
      }
  return out;
}

}  // namespace

ContractionReport validate_contraction(const HyperbolicSkewProduct& skew, std::size_t pairs, std::uint64_t seed) {
  if (pairs == 0) throw std::invalid_argument("validate_contraction: pairs must be >= 1");
  const auto& map = skew.base();
  const auto& ball = skew.omega();
  ContractionReport rep;
  rep.pairs = pairs;
  Rng rng(seed);
  const auto boundary = ball_samples(ball);
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::size_t k = i % map.size();
    const Cell c = map.cell(k);
    const double x = c.lo + van_der_corput(i / map.size()) * c.length();
    const FiberPoint z1 = uniform_in_ball(ball, rng);
    FiberPoint z2 = uniform_in_ball(ball, rng);
    if ((z1 - z2).norm() == 0.0) continue;
    const FiberPoint g1 = skew.fiber(k, x, z1), g2 = skew.fiber(k, x, z2);
    const double ratio = (g1 - g2).norm() / (z1 - z2).norm();
    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
    if (ratio > skew.kappa() * (1.0 + 1e-12)) ++rep.violations;
    for (const FiberPoint* g : {&g1, &g2}) {
      const double r = (*g - ball.center).norm();
      rep.worst_radius = std::max(rep.worst_radius, r);
      rep.invariance = rep.invariance && ball.contains(*g);
    }
    if (i < 1000)
      for (const auto& s : boundary) {
        const double r = (skew.fiber(k, x, s) - ball.center).norm();
        rep.worst_radius = std::max(rep.worst_radius, r);
        rep.invariance = rep.invariance && r <= ball.radius + 1e-12;
      }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Disintegration

struct Disintegration::Leaf {
  double y;                                  // current base point x_i
  int level;                                 // i
  double weight;                             // prod 1/|f'(x_m)|, m <= i
  FiberPoint acc;                            // sum A^(m-1) o(x_m), affine fibers
  std::vector<std::pair<std::size_t, double>> path;  // (k_m, x_m), generic fibers
};

Disintegration::Disintegration(SkewPtr skew, int depth, std::shared_ptr<const InvariantDensity> density)
    : skew_(std::move(skew)), depth_(depth), density_(std::move(density)) {
  if (!skew_) throw std::invalid_argument("disintegrate: null skew product");
  if (depth_ < 1) throw std::invalid_argument("disintegrate: depth must be >= 1");
  const auto& map = skew_->base();
  // Number of n-fold preimages of a point of cell j is ((A^T)^n 1)_j.
  const Eigen::MatrixXd at = map.transitions().cast<double>().transpose();
  Eigen::VectorXd count = Eigen::VectorXd::Ones(at.rows());
  for (int i = 0; i < depth_; ++i) count = at * count;
  leaves_ = count.maxCoeff();
  if (leaves_ > kNodeBudget)
    throw DepthOverflow("disintegrate: depth " + std::to_string(depth_) + " needs " + std::to_string(leaves_) +
                        " inverse branches, budget is " + std::to_string(static_cast<long long>(kNodeBudget)));
  if (skew_->is_affine()) {
    const auto d = skew_->omega().dimension();
    powers_.push_back(FiberMatrix::Identity(d, d));
    for (int i = 0; i < depth_; ++i) powers_.push_back(skew_->linear() * powers_.back());
  }
}

double Disintegration::density(double x) const {
  if (density_) return density_->value_at(x);
  return 1.0 / skew_->base().domain().length();
}

template <typename Visit>
void Disintegration::traverse(double x, Visit&& visit) const {
  const auto& map = skew_->base();
  const auto& skew = *skew_;
  const Cell dom = map.domain();
  const bool affine = skew.is_affine();

  auto children = [&](const Leaf& node, auto&& emit) {
    for (std::size_t k = 0; k < map.size(); ++k) {
      const Cell img = map.image(k);
      const bool inside = (node.y >= img.lo && node.y < img.hi) || (node.y == img.hi && img.hi == dom.hi);
      if (!inside) continue;
      Leaf child;
      child.y = map.inverse(k, node.y);
      child.level = node.level + 1;
      child.weight = node.weight / std::abs(map.derivative(k, child.y));
      if (affine) {
        child.acc = node.acc + powers_[static_cast<std::size_t>(node.level)] * skew.offset(k, child.y);
      } else {
        child.path = node.path;
        child.path.emplace_back(k, child.y);
      }
      emit(std::move(child));
    }
  };

  auto finish = [&](const Leaf& leaf) -> FiberPoint {
    if (affine) return leaf.acc + powers_.back() * skew.origin();
    FiberPoint z = skew.origin();
    for (auto it = leaf.path.rbegin(); it != leaf.path.rend(); ++it) z = skew.fiber(it->first, it->second, z);
    return z;
  };

  Leaf root{x, 0, 1.0, FiberPoint::Zero(skew.omega().dimension()), {}};

  // Breadth-first split into a fixed frontier, then depth-first per subtree.
  std::vector<Leaf> frontier{root};
  while (frontier.front().level < depth_ && frontier.size() < 64) {
    std::vector<Leaf> next;
    for (const auto& n : frontier) children(n, [&](Leaf&& c) { next.push_back(std::move(c)); });
    if (next.empty()) break;
    frontier = std::move(next);
  }

  std::vector<std::decay_t<decltype(visit.make())>> partial(frontier.size(), visit.make());
  parallel_for(frontier.size(), [&](std::size_t s) {
    auto& acc = partial[s];
    auto dfs = [&](auto&& self, const Leaf& node) -> void {
      if (node.level == depth_) {
        const double w = node.weight * density(node.y);
        visit.leaf(acc, finish(node), w, node);
        return;
      }
      children(node, [&](Leaf&& c) { self(self, c); });
    };
    dfs(dfs, frontier[s]);
  });
  for (const auto& p : partial) visit.merge(p);
}

namespace {

struct SumAccumulator {
  std::vector<double> sums;
  double weight = 0.0;
  std::size_t leaves = 0;
};

}  // namespace

std::vector<EtaValue> Disintegration::evaluate(double x, const std::vector<SkewObservable>& vs,
                                               const std::vector<double>& fiber_lipschitz) const {
  const auto n = vs.size();
  SumAccumulator total{std::vector<double>(n, 0.0), 0.0, 0};
  struct {
    const std::vector<SkewObservable>* vs;
    double x;
    SumAccumulator* total;
    SumAccumulator make() const { return {std::vector<double>(vs->size(), 0.0), 0.0, 0}; }
    void leaf(SumAccumulator& a, const FiberPoint& z, double w, const Leaf&) const {
      for (std::size_t i = 0; i < vs->size(); ++i) a.sums[i] += w * (*vs)[i](x, z);
      a.weight += w;
      ++a.leaves;
    }
    void merge(const SumAccumulator& a) const {
      for (std::size_t i = 0; i < a.sums.size(); ++i) total->sums[i] += a.sums[i];
      total->weight += a.weight;
      total->leaves += a.leaves;
    }
  } visitor{&vs, x, &total};
  traverse(x, visitor);
  if (total.leaves == 0) throw DomainError("disintegration: point " + std::to_string(x) + " has no preimages");

  const double shrink = std::pow(skew_->kappa(), depth_) * skew_->omega().diameter();
  std::vector<EtaValue> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].value = total.sums[i] / total.weight;
    out[i].error_bound = shrink * (i < fiber_lipschitz.size() ? fiber_lipschitz[i] : 0.0);
    out[i].leaves = total.leaves;
  }
  return out;
}

EtaValue Disintegration::operator()(double x, const SkewObservable& v, double fiber_lipschitz) const {
  return evaluate(x, {v}, {fiber_lipschitz}).front();
}

std::pair<double, double> Disintegration::envelope(double x, const SkewObservable& v) const {
  const auto samples = ball_samples(skew_->omega());
  const auto& skew = *skew_;
  struct Acc {
    double lo = 0.0, hi = 0.0, weight = 0.0;
  };
  Acc total;
  struct {
    const std::vector<FiberPoint>* samples;
    const HyperbolicSkewProduct* skew;
    const std::vector<FiberMatrix>* powers;
    const SkewObservable* v;
    double x;
    Acc* total;
    Acc make() const { return {}; }
    void leaf(Acc& a, const FiberPoint& z, double w, const Leaf& node) const {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& s : *samples) {
        FiberPoint zs;
        if (skew->is_affine()) {
          zs = z + powers->back() * (s - skew->origin());
        } else {
          zs = s;
          for (auto it = node.path.rbegin(); it != node.path.rend(); ++it) zs = skew->fiber(it->first, it->second, zs);
        }
        const double val = (*v)(x, zs);
        lo = std::min(lo, val);
        hi = std::max(hi, val);
      }
      a.lo += w * lo;
      a.hi += w * hi;
      a.weight += w;
    }
    void merge(const Acc& a) const {
      total->lo += a.lo;
      total->hi += a.hi;
      total->weight += a.weight;
    }
  } visitor{&samples, &skew, &powers_, &v, x, &total};
  traverse(x, visitor);
  return {total.lo / total.weight, total.hi / total.weight};
}

namespace {

template <typename F>
void cell_quadrature(const ExpandingMarkovMap& map, std::size_t panels, std::size_t order, F&& f) {
  const GaussLegendre gl(order);
  for (std::size_t k = 0; k < map.size(); ++k) {
    const Cell c = map.cell(k);
    const double h = c.length() / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double mid = c.lo + h * (static_cast<double>(p) + 0.5);
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) f(mid + 0.5 * h * gl.nodes[i], 0.5 * h * gl.weights[i]);
    }
  }
}

}  // namespace

double eta_integral(const Disintegration& dis, const SkewObservable& v, std::size_t panels, std::size_t order) {
  double total = 0.0;
  cell_quadrature(dis.skew().base(), panels, order,
                  [&](double x, double w) { total += w * dis.density(x) * dis(x, v).value; });
  return total;
}

SandwichEstimate sandwich(const Disintegration& dis, const SkewObservable& v, std::size_t panels, std::size_t order) {
  SandwichEstimate s;
  cell_quadrature(dis.skew().base(), panels, order, [&](double x, double w) {
    const auto [lo, hi] = dis.envelope(x, v);
    s.lower += w * dis.density(x) * lo;
    s.upper += w * dis.density(x) * hi;
  });
  return s;
}

SmoothnessReport smoothness_probe(const Disintegration& dis, const SkewObservable& v, double sup_v, double sup_dv,
                                  std::size_t grid, double h, double constant) {
  if (grid == 0) throw std::invalid_argument("smoothness_probe: grid must be >= 1");
  if (!(h > 0.0)) throw std::invalid_argument("smoothness_probe: step must be positive");
  const auto& map = dis.skew().base();
  const Cell dom = map.domain();
  SmoothnessReport rep;
  rep.scale = sup_v + sup_dv;
  rep.constant = constant;
  for (std::size_t i = 0; i < grid; ++i) {
    const double x = dom.lo + dom.length() * (static_cast<double>(i) + 0.5) / static_cast<double>(grid);
    const Cell c = map.cell(map.locate(x));
    const double step = x + h < c.hi ? h : -h;
    if (x + step <= c.lo) throw std::invalid_argument("smoothness_probe: step larger than a partition cell");
    const double slope = std::abs(dis(x + step, v).value - dis(x, v).value) / h;
    rep.max_slope = std::max(rep.max_slope, slope);
  }
  rep.empirical_constant = rep.scale > 0.0 ? rep.max_slope / rep.scale : 0.0;
  return rep;
}

}  // namespace mixlab
