#include "mixlab/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mixlab {

GaussLegendre::GaussLegendre(std::size_t order) : nodes(order), weights(order) {
  if (order == 0) throw std::invalid_argument("GaussLegendre: order must be >= 1");
  const double n = static_cast<double>(order);
  for (std::size_t i = 0; i < order; ++i) {
    // Newton on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= order; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = x;
    weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

}  // namespace mixlab
