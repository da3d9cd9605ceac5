#pragma once

#include <cstddef>
#include <vector>

namespace mixlab {

/// Dense univariate polynomial, coefficients in ascending order.
template <typename Scalar>
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Scalar> coefficients) : c_(std::move(coefficients)) {}

  const std::vector<Scalar>& coefficients() const noexcept { return c_; }
  std::size_t degree() const noexcept { return c_.empty() ? 0 : c_.size() - 1; }

  Scalar operator()(const Scalar& x) const {
    Scalar acc(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  Polynomial derivative() const {
    std::vector<Scalar> d;
    for (std::size_t k = 1; k < c_.size(); ++k) d.push_back(c_[k] * Scalar(static_cast<long>(k)));
    return Polynomial(std::move(d));
  }

  template <typename Other>
  Polynomial<Other> cast() const {
    std::vector<Other> out;
    out.reserve(c_.size());
    for (const auto& v : c_) out.push_back(static_cast<Other>(v));
    return Polynomial<Other>(std::move(out));
  }

 private:
  std::vector<Scalar> c_;
};

}  // namespace mixlab
