#pragma once

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "mixlab/markov_map.hpp"

namespace mixlab {

/// One first-return branch F = f^R : cell -> base cell.
template <typename Scalar>
struct InducedCell {
  BasicCell<Scalar> cell;
  int return_time = 0;
  Itinerary itinerary;  ///< Cells visited at times 0 .. R-1.
};

/// First-return map to a partition cell, enumerated up to a depth cap.
///
/// `tail[n]` holds m(R >= n) for n = 0 .. depth_cap + 1 with m the normalized
/// Lebesgue measure on the base cell; tail[depth_cap + 1] is the mass that the
/// truncation drops.
template <typename Scalar>
struct InducedMap {
  std::size_t base_cell = 0;
  BasicCell<Scalar> base;
  int depth_cap = 0;
  std::vector<InducedCell<Scalar>> cells;
  std::vector<Scalar> tail;

  Scalar residual_mass() const { return tail.back(); }
};

/// True iff `target` can be reached from `from` in one or more steps.
template <typename Map>
bool reachable(const Map& map, std::size_t from, std::size_t target) {
  std::vector<char> seen(map.size(), 0);
  std::vector<std::size_t> stack{from};
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < map.size(); ++j) {
      if (!map.allowed(i, j)) continue;
      if (j == target) return true;
      if (!seen[j]) {
        seen[j] = 1;
        stack.push_back(j);
      }
    }
  }
  return false;
}

/// Enumerates every first-return branch to `base_cell` with R <= depth_cap.
/// Works for PiecewiseAffineMap<Scalar> (exact when Scalar is Rational) and
/// for ExpandingMarkovMap with Scalar = double.
template <typename Scalar, typename Map>
InducedMap<Scalar> induce_first_return(const Map& map, std::size_t base_cell, int depth_cap) {
  if (base_cell >= map.size()) throw std::invalid_argument("induce_first_return: base cell out of range");
  if (depth_cap < 1) throw std::invalid_argument("induce_first_return: depth cap must be >= 1");
  if (!reachable(map, base_cell, base_cell))
    throw NoReturn("cell " + std::to_string(base_cell) + " is not recurrent under the transition matrix");

  InducedMap<Scalar> out;
  out.base_cell = base_cell;
  const auto bc = map.cell(base_cell);
  out.base = {Scalar(bc.lo), Scalar(bc.hi)};
  out.depth_cap = depth_cap;

  struct Pending {
    Itinerary itinerary;  // cells visited at times 0..j-1
    std::size_t current;  // cell containing f^j of the cylinder
  };
  std::vector<Scalar> returned(static_cast<std::size_t>(depth_cap) + 1, Scalar(0));
  std::vector<Pending> level{{{}, base_cell}};
  for (int j = 0; j < depth_cap && !level.empty(); ++j) {
    std::vector<Pending> next;
    for (const auto& p : level) {
      for (std::size_t k = 0; k < map.size(); ++k) {
        if (!map.allowed(p.current, k)) continue;
        Itinerary it = p.itinerary;
        it.push_back(static_cast<int>(p.current));
        if (k == base_cell) {
          const auto target = map.cell(k);
          const BasicCell<Scalar> cell = pull_back<Scalar>(map, it, {Scalar(target.lo), Scalar(target.hi)});
          returned[static_cast<std::size_t>(j + 1)] += cell.length();
          out.cells.push_back({cell, j + 1, std::move(it)});
        } else {
          next.push_back({std::move(it), k});
        }
      }
    }
    level = std::move(next);
  }

  const Scalar base_len = out.base.length();
  out.tail.assign(static_cast<std::size_t>(depth_cap) + 2, Scalar(0));
  Scalar remaining = base_len;
  out.tail[0] = Scalar(1);
  for (int n = 1; n <= depth_cap + 1; ++n) {
    remaining = remaining - returned[static_cast<std::size_t>(n - 1)];
    out.tail[static_cast<std::size_t>(n)] = remaining / base_len;
  }
  return out;
}

/// Largest endpoint error of F = f^R on the enumerated cells: each branch must
/// map its cell onto the whole base cell. In floating point the forward
/// iteration amplifies endpoint rounding by |(f^R)'|; pass the exact map and
/// an exact induced map to get a rounding-free answer.
template <typename Scalar, typename Map>
double full_branch_defect(const Map& map, const InducedMap<Scalar>& induced) {
  double worst = 0.0;
  for (const auto& c : induced.cells) {
    Scalar a = c.cell.lo, b = c.cell.hi;
    for (const int k : c.itinerary) {
      a = map.forward(static_cast<std::size_t>(k), a);
      b = map.forward(static_cast<std::size_t>(k), b);
    }
    if (b < a) std::swap(a, b);
    worst = std::max({worst, std::abs(static_cast<double>(a - induced.base.lo)),
                      std::abs(static_cast<double>(b - induced.base.hi))});
  }
  return worst;
}

struct TailStatistics {
  std::vector<double> tail;  ///< m(R >= n), n = 0 .. depth_cap + 1
  double alpha = 0.0;        ///< fitted rate in m(R >= n) ~ C e^{-alpha n}; +inf when R is bounded by 1
  double prefactor = 0.0;
  double sigma0 = 0.0;       ///< a rate with sum m(R = n) e^{sigma0 n tau_bar} convergent
  double tilted_sum = 0.0;   ///< the partial sum at sigma0 over the enumerated depths
  std::size_t fit_points = 0;

  bool degenerate() const { return std::isinf(alpha); }
};

/// Least-squares fit of log m(R >= n) against n over n >= 2. `tau_bar` is the
/// roof upper bound used to turn R-tails into roof tails.
TailStatistics tail_statistics(const InducedMap<double>& induced, double tau_bar = 1.0);

template <typename Scalar>
InducedMap<double> to_double(const InducedMap<Scalar>& in) {
  InducedMap<double> out;
  out.base_cell = in.base_cell;
  out.base = {static_cast<double>(in.base.lo), static_cast<double>(in.base.hi)};
  out.depth_cap = in.depth_cap;
  for (const auto& c : in.cells)
    out.cells.push_back({{static_cast<double>(c.cell.lo), static_cast<double>(c.cell.hi)}, c.return_time, c.itinerary});
  for (const auto& t : in.tail) out.tail.push_back(static_cast<double>(t));
  return out;
}

}  // namespace mixlab
