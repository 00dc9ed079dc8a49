#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "neumann/circuit.hpp"
#include "neumann/errors.hpp"
#include "neumann/poly.hpp"

namespace neumann {

/// E(z) = 1 - (1 - z) f(z) for an approximate radix-m kernel f, kept up to
/// degree cap.
template <class Scalar>
struct ErrorMap {
  int radix = 0;
  Poly<Scalar> E;
  std::size_t cap = 0;

  /// Leading coefficient c = [E]_m = 1 - [f]_m.
  Scalar leading() const { return E[static_cast<std::size_t>(radix)]; }
};

inline constexpr double default_prefix_tolerance = 1e-4;

/// Largest |[(1 - z) f]_j - [1]_j| over j < m.
template <class Scalar>
double prefix_condition_defect(const Poly<Scalar>& f, int m) {
  const auto g = one_minus_z_times(f);
  double worst = 0.0;
  for (int j = 0; j < m; ++j) {
    const Scalar target = j == 0 ? Scalar(1) : Scalar(0);
    worst = std::max(worst, std::abs(to_double(g[static_cast<std::size_t>(j)] - target)));
  }
  return worst;
}

/// Error map of f. Over the exact domain the prefix condition must hold
/// exactly; over binary64 within `tolerance`.
template <class Scalar>
ErrorMap<Scalar> error_map(const Poly<Scalar>& f, int m, std::size_t cap,
                           double tolerance = default_prefix_tolerance) {
  if (m < 2) throw std::invalid_argument("error_map: radix must be >= 2");
  const auto g = one_minus_z_times(f);
  for (int j = 0; j < m; ++j) {
    const Scalar target = j == 0 ? Scalar(1) : Scalar(0);
    const Scalar dev = g[static_cast<std::size_t>(j)] - target;
    const bool ok = is_exact_scalar_v<Scalar> ? is_zero(dev) : std::abs(to_double(dev)) <= tolerance;
    if (!ok) {
      throw PrefixConditionError("(1-z)f(z) deviates from 1 at degree " + std::to_string(j) +
                                 " by " + std::to_string(to_double(dev)));
    }
  }
  auto E = Poly<Scalar>::constant(Scalar(1)) - g;
  E.truncate(cap);
  return {m, std::move(E), cap};
}

/// n-fold composition E^[n], with E^[0](z) = z and E^[n+1] = E o E^[n].
template <class Scalar>
Poly<Scalar> compose_error(const ErrorMap<Scalar>& e, int n, std::size_t cap) {
  if (n < 0) throw std::invalid_argument("compose_error: n must be >= 0");
  auto out = Poly<Scalar>::monomial(1);
  for (int i = 0; i < n; ++i) out = compose_truncated(e.E, out, cap);
  return out.truncate(cap);
}

/// One lift of the radix-kernel summation, f(z) * f(E(z)), up to degree cap.
template <class Scalar>
Poly<Scalar> kernel_lift(const Poly<Scalar>& f, const Poly<Scalar>& E, std::size_t cap) {
  return poly_mul_truncated(f, compose_truncated(f, E, cap), cap);
}

/// max_j |[E(E)]_j - [1 - (1 - z) f f(E)]_j| for j <= cap. Zero (exactly, over
/// the rationals) for every polynomial f.
template <class Scalar>
double composition_identity_defect(const Poly<Scalar>& f, std::size_t cap) {
  const auto E = (Poly<Scalar>::constant(Scalar(1)) - one_minus_z_times(f));
  const auto lhs = compose_truncated(E, E, cap);
  auto rhs = Poly<Scalar>::constant(Scalar(1)) - one_minus_z_times(kernel_lift(f, E, cap));
  rhs.truncate(cap);
  const auto diff = lhs - rhs;
  double worst = 0.0;
  for (const auto& x : diff.coeffs()) worst = std::max(worst, std::abs(to_double(x)));
  return worst;
}

/// max_{j < m^2} |[f f(E)]_j - 1|.
template <class Scalar>
double prefix_growth_deviation(const Poly<Scalar>& f, int m) {
  const std::size_t n = static_cast<std::size_t>(m) * static_cast<std::size_t>(m);
  const auto E = (Poly<Scalar>::constant(Scalar(1)) - one_minus_z_times(f));
  const auto lifted = kernel_lift(f, E, n + 1);
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    worst = std::max(worst, std::abs(to_double(lifted[j] - Scalar(1))));
  }
  return worst;
}

/// Tolerance used by prefix_growth_check for binary64 kernels:
/// 1e-6 * (1 + prefix_error * m^2).
inline double prefix_growth_tolerance(double prefix_error, int m) {
  return 1e-6 * (1.0 + prefix_error * static_cast<double>(m) * m);
}

/// Does f(z) f(E(z)) agree with 1/(1 - z) through degree m^2 - 1? Exact
/// kernels are compared exactly; binary64 kernels within
/// prefix_growth_tolerance(prefix error of f, m).
template <class Scalar>
bool prefix_growth_check(const Poly<Scalar>& f, int m) {
  const double dev = prefix_growth_deviation(f, m);
  if constexpr (is_exact_scalar_v<Scalar>) {
    return dev == 0.0;
  } else {
    const double pe = report_from_poly(f, m, 0).prefix_error;
    return dev <= prefix_growth_tolerance(pe, m);
  }
}

/// c^((m^n - 1)/(m - 1)), the leading coefficient of E^[n]. The exponent is
/// formed in integer arithmetic; the power underflows to 0 for |c| < 1 and
/// large exponents.
inline double propagation_leading(double c, int m, int n) {
  if (n < 1) throw std::invalid_argument("propagation_leading: n must be >= 1");
  if (m < 2) throw std::invalid_argument("propagation_leading: radix must be >= 2");
  // exponent = 1 + m + ... + m^{n-1}
  std::uint64_t exponent = 0;
  std::uint64_t term = 1;
  bool saturated = false;
  for (int i = 0; i < n; ++i) {
    if (exponent > std::numeric_limits<std::uint64_t>::max() - term) {
      saturated = true;
      break;
    }
    exponent += term;
    if (i + 1 < n) {
      if (term > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(m)) {
        saturated = true;
        break;
      }
      term *= static_cast<std::uint64_t>(m);
    }
  }
  if (saturated) {
    const double a = std::abs(c);
    if (a < 1.0) return 0.0;
    // parity of the exponent: odd for even m, n mod 2 for odd m
    const bool odd = (m % 2 == 0) ? true : (n % 2 == 1);
    if (a == 1.0) return (c < 0 && odd) ? -1.0 : 1.0;
    return (c < 0 && odd) ? -std::numeric_limits<double>::infinity()
                          : std::numeric_limits<double>::infinity();
  }
  double result = 1.0;
  double base = c;
  while (exponent > 0) {
    if (exponent & 1U) result *= base;
    base *= base;
    exponent >>= 1U;
  }
  return result;
}

}  // namespace neumann
