#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

#include <gmpxx.h>

namespace neumann {

// Arbitrary-precision rational, always held in canonical form
// (positive denominator, gcd(|num|, den) = 1).
class BigRational {
 public:
  BigRational() = default;
  BigRational(long value) : v_(value) {}  // NOLINT(google-explicit-constructor)
  BigRational(long num, long den) {
    if (den == 0) throw std::domain_error("BigRational: zero denominator");
    v_ = mpq_class(num, den);
    v_.canonicalize();
  }
  explicit BigRational(mpq_class v) : v_(std::move(v)) { v_.canonicalize(); }

  // Accepts "num/den" or a plain integer "num".
  static BigRational parse(std::string_view text) {
    std::string s(text);
    if (s.empty()) throw std::invalid_argument("BigRational: empty string");
    mpq_class q;
    if (q.set_str(s, 10) != 0) {
      throw std::invalid_argument("BigRational: cannot parse '" + s + "'");
    }
    if (q.get_den() == 0) throw std::domain_error("BigRational: zero denominator");
    q.canonicalize();
    return BigRational(std::move(q));
  }

  const mpq_class& value() const noexcept { return v_; }
  mpz_class numerator() const { return v_.get_num(); }
  mpz_class denominator() const { return v_.get_den(); }

  bool is_zero() const noexcept { return sgn(v_) == 0; }
  double to_double() const { return v_.get_d(); }

  // Always "num/den", including integers ("3/1").
  std::string str() const {
    return v_.get_num().get_str() + "/" + v_.get_den().get_str();
  }

  BigRational& operator+=(const BigRational& o) { v_ += o.v_; return *this; }
  BigRational& operator-=(const BigRational& o) { v_ -= o.v_; return *this; }
  BigRational& operator*=(const BigRational& o) { v_ *= o.v_; return *this; }
  BigRational& operator/=(const BigRational& o) {
    if (o.is_zero()) throw std::domain_error("BigRational: division by zero");
    v_ /= o.v_;
    return *this;
  }

  friend BigRational operator+(BigRational a, const BigRational& b) { return a += b; }
  friend BigRational operator-(BigRational a, const BigRational& b) { return a -= b; }
  friend BigRational operator*(BigRational a, const BigRational& b) { return a *= b; }
  friend BigRational operator/(BigRational a, const BigRational& b) { return a /= b; }
  friend BigRational operator-(const BigRational& a) { return BigRational(mpq_class(-a.v_)); }

  friend bool operator==(const BigRational& a, const BigRational& b) { return cmp(a.v_, b.v_) == 0; }
  friend std::strong_ordering operator<=>(const BigRational& a, const BigRational& b) {
    int c = cmp(a.v_, b.v_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  friend std::ostream& operator<<(std::ostream& os, const BigRational& r) { return os << r.str(); }

 private:
  mpq_class v_;
};

inline BigRational abs(const BigRational& r) { return r < BigRational(0) ? -r : r; }

// Scalar-domain helpers shared by the exact and binary64 code paths.
inline bool is_zero(double x) noexcept { return x == 0.0; }
inline bool is_zero(const BigRational& x) noexcept { return x.is_zero(); }
inline double to_double(double x) noexcept { return x; }
inline double to_double(const BigRational& x) { return x.to_double(); }

template <class Scalar>
inline constexpr bool is_exact_scalar_v = std::is_same_v<Scalar, BigRational>;

template <class Scalar>
constexpr std::string_view domain_name() {
  return is_exact_scalar_v<Scalar> ? "exact" : "float";
}

}  // namespace neumann
