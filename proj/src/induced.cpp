#include "mixlab/induced.hpp"

#include <Eigen/Dense>

namespace mixlab {

TailStatistics tail_statistics(const InducedMap<double>& induced, double tau_bar) {
  if (!(tau_bar > 0.0)) throw std::invalid_argument("tail_statistics: tau_bar must be positive");
  TailStatistics st;
  st.tail = induced.tail;

  std::vector<double> ns, logs;
  for (std::size_t n = 2; n < st.tail.size(); ++n)
    if (st.tail[n] > 0.0) {
      ns.push_back(static_cast<double>(n));
      logs.push_back(std::log(st.tail[n]));
    }
  bool any_excursion = false;
  for (std::size_t n = 2; n < st.tail.size(); ++n) any_excursion = any_excursion || st.tail[n] > 0.0;
  if (!any_excursion) {
    st.alpha = std::numeric_limits<double>::infinity();
    st.prefactor = 0.0;
    st.sigma0 = std::numeric_limits<double>::infinity();
    return st;
  }
  if (ns.size() < 4)
    throw InsufficientDepth("tail_statistics: need at least 4 tail points, have " + std::to_string(ns.size()));

  Eigen::MatrixXd design(static_cast<Eigen::Index>(ns.size()), 2);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(ns.size()));
  for (std::size_t i = 0; i < ns.size(); ++i) {
    design(static_cast<Eigen::Index>(i), 0) = 1.0;
    design(static_cast<Eigen::Index>(i), 1) = ns[i];
    rhs(static_cast<Eigen::Index>(i)) = logs[i];
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  st.alpha = -coef(1);
  st.prefactor = std::exp(coef(0));
  st.fit_points = ns.size();

  // Any sigma0 < alpha / tau_bar makes the tilted series converge; report half.
  st.sigma0 = st.alpha > 0.0 ? 0.5 * st.alpha / tau_bar : 0.0;
  for (std::size_t n = 1; n + 1 < st.tail.size(); ++n) {
    const double mass = st.tail[n] - st.tail[n + 1];
    st.tilted_sum += mass * std::exp(st.sigma0 * static_cast<double>(n) * tau_bar);
  }
  return st;
}

}  // namespace mixlab
