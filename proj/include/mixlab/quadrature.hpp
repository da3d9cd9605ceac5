#pragma once

#include <cstddef>
#include <vector>

namespace mixlab {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(std::size_t order);

  /// Integral of f over [a, b] split into `panels` equal panels.
  template <typename F>
  double integrate(F&& f, double a, double b, std::size_t panels = 1) const {
    const double h = (b - a) / static_cast<double>(panels);
    double total = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
      const double lo = a + h * static_cast<double>(p);
      const double mid = lo + 0.5 * h;
      double acc = 0.0;
      for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(mid + 0.5 * h * nodes[i]);
      total += 0.5 * h * acc;
    }
    return total;
  }
};

}  // namespace mixlab
