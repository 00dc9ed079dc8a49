#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "neumann/rational.hpp"

namespace neumann {

/// Dense univariate polynomial c_0 + c_1 z + ... + c_D z^D.
///
/// Over the exact domain the representation is canonical: the zero
/// polynomial is the empty list and the top coefficient is nonzero.
/// Over binary64 trailing zeros are kept unless normalize() is called.
template <class Scalar>
class Poly {
 public:
  using scalar_type = Scalar;

  Poly() = default;
  explicit Poly(std::vector<Scalar> coeffs) : c_(std::move(coeffs)) {
    if constexpr (is_exact_scalar_v<Scalar>) normalize();
  }
  Poly(std::initializer_list<Scalar> coeffs) : Poly(std::vector<Scalar>(coeffs)) {}

  static Poly constant(Scalar value) { return Poly(std::vector<Scalar>{std::move(value)}); }

  static Poly monomial(std::size_t degree, Scalar coeff = Scalar(1)) {
    std::vector<Scalar> c(degree + 1, Scalar(0));
    c[degree] = std::move(coeff);
    return Poly(std::move(c));
  }

  /// 1 + z + ... + z^{n-1}
  static Poly ones(std::size_t n) { return Poly(std::vector<Scalar>(n, Scalar(1))); }

  /// [P]_j, zero beyond the stored length.
  Scalar operator[](std::size_t j) const { return j < c_.size() ? c_[j] : Scalar(0); }

  std::span<const Scalar> coeffs() const noexcept { return c_; }
  std::size_t size() const noexcept { return c_.size(); }

  /// Degree of the highest nonzero coefficient; -1 for the zero polynomial.
  std::ptrdiff_t degree() const {
    for (std::size_t j = c_.size(); j-- > 0;) {
      if (!is_zero(c_[j])) return static_cast<std::ptrdiff_t>(j);
    }
    return -1;
  }

  bool is_zero_poly() const { return degree() < 0; }

  Poly& normalize() {
    while (!c_.empty() && is_zero(c_.back())) c_.pop_back();
    return *this;
  }

  Poly& operator+=(const Poly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), Scalar(0));
    for (std::size_t j = 0; j < o.c_.size(); ++j) c_[j] += o.c_[j];
    if constexpr (is_exact_scalar_v<Scalar>) normalize();
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), Scalar(0));
    for (std::size_t j = 0; j < o.c_.size(); ++j) c_[j] -= o.c_[j];
    if constexpr (is_exact_scalar_v<Scalar>) normalize();
    return *this;
  }
  Poly& operator*=(const Scalar& s) {
    for (auto& x : c_) x *= s;
    if constexpr (is_exact_scalar_v<Scalar>) normalize();
    return *this;
  }

  /// this += s * o, without a temporary.
  Poly& add_scaled(const Scalar& s, const Poly& o) {
    if (is_zero(s)) return *this;
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), Scalar(0));
    for (std::size_t j = 0; j < o.c_.size(); ++j) c_[j] += s * o.c_[j];
    if constexpr (is_exact_scalar_v<Scalar>) normalize();
    return *this;
  }

  /// Drop every coefficient of degree > cap.
  Poly& truncate(std::size_t cap) {
    if (c_.size() > cap + 1) c_.resize(cap + 1);
    if constexpr (is_exact_scalar_v<Scalar>) normalize();
    return *this;
  }

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(const Scalar& s, Poly a) { return a *= s; }

  /// Coefficient-wise equality, ignoring trailing zeros.
  friend bool operator==(const Poly& a, const Poly& b) {
    const std::size_t n = std::max(a.c_.size(), b.c_.size());
    for (std::size_t j = 0; j < n; ++j) {
      if (!(a[j] == b[j])) return false;
    }
    return true;
  }

 private:
  std::vector<Scalar> c_;
};

using RationalPoly = Poly<BigRational>;
using FloatPoly = Poly<double>;

namespace detail {
inline constexpr std::size_t no_cap = std::numeric_limits<std::size_t>::max();
}

/// Product a*b keeping only degrees <= cap.
template <class Scalar>
Poly<Scalar> poly_mul_truncated(const Poly<Scalar>& a, const Poly<Scalar>& b, std::size_t cap) {
  if (a.size() == 0 || b.size() == 0) return {};
  const std::size_t full = a.size() + b.size() - 1;
  const std::size_t n = std::min(full, cap == detail::no_cap ? full : cap + 1);
  std::vector<Scalar> out(n, Scalar(0));
  const auto ac = a.coeffs();
  const auto bc = b.coeffs();
  for (std::size_t i = 0; i < ac.size() && i < n; ++i) {
    if (is_zero(ac[i])) continue;
    const std::size_t jmax = std::min(bc.size(), n - i);
    for (std::size_t j = 0; j < jmax; ++j) out[i + j] += ac[i] * bc[j];
  }
  return Poly<Scalar>(std::move(out));
}

/// Coefficient-wise convolution; degree adds for nonzero operands.
template <class Scalar>
Poly<Scalar> poly_mul(const Poly<Scalar>& a, const Poly<Scalar>& b) {
  return poly_mul_truncated(a, b, detail::no_cap);
}

template <class Scalar>
Poly<Scalar> operator*(const Poly<Scalar>& a, const Poly<Scalar>& b) {
  return poly_mul(a, b);
}

/// f(g(z)) by Horner's rule with every intermediate truncated at cap.
template <class Scalar>
Poly<Scalar> compose_truncated(const Poly<Scalar>& f, const Poly<Scalar>& g, std::size_t cap) {
  Poly<Scalar> acc;
  const auto fc = f.coeffs();
  for (std::size_t j = fc.size(); j-- > 0;) {
    acc = poly_mul_truncated(acc, g, cap);
    acc += Poly<Scalar>::constant(fc[j]);
  }
  return acc.truncate(cap);
}

/// (1 - z) * f(z)
template <class Scalar>
Poly<Scalar> one_minus_z_times(const Poly<Scalar>& f) {
  std::vector<Scalar> out(f.size() + 1, Scalar(0));
  const auto fc = f.coeffs();
  for (std::size_t j = 0; j < fc.size(); ++j) {
    out[j] += fc[j];
    out[j + 1] -= fc[j];
  }
  return Poly<Scalar>(std::move(out));
}

inline FloatPoly to_float(const RationalPoly& p) {
  std::vector<double> c;
  c.reserve(p.size());
  for (const auto& x : p.coeffs()) c.push_back(x.to_double());
  return FloatPoly(std::move(c));
}

}  // namespace neumann
