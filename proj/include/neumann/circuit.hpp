#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neumann/errors.hpp"
#include "neumann/poly.hpp"

namespace neumann {

// Basis elements of a kernel circuit: I (index 0), B (index 1) and the
// products P_1, P_2, ... (index i + 1 for P_i).
using BasisIndex = std::size_t;
inline constexpr BasisIndex basis_identity = 0;
inline constexpr BasisIndex basis_generator = 1;
constexpr BasisIndex basis_product(std::size_t i) { return i + 1; }

inline std::string basis_name(BasisIndex idx) {
  if (idx == basis_identity) return "I";
  if (idx == basis_generator) return "B";
  return "P" + std::to_string(idx - 1);
}

inline BasisIndex parse_basis_name(std::string_view name) {
  if (name == "I") return basis_identity;
  if (name == "B") return basis_generator;
  if (name.size() >= 2 && name.front() == 'P') {
    std::size_t i = 0;
    auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), i);
    if (ec == std::errc() && ptr == name.data() + name.size() && i >= 1) return basis_product(i);
  }
  throw CircuitError("unknown basis name '" + std::string(name) + "'");
}

/// Weighted sum over basis elements, sum_X w_X X.
template <class Scalar>
class LinComb {
 public:
  using scalar_type = Scalar;
  using map_type = std::map<BasisIndex, Scalar>;

  LinComb() = default;
  LinComb(std::initializer_list<std::pair<const BasisIndex, Scalar>> init) {
    for (const auto& [k, w] : init) add(k, w);
  }

  LinComb& add(BasisIndex idx, const Scalar& w) {
    auto [it, inserted] = w_.try_emplace(idx, w);
    if (!inserted) it->second += w;
    if (is_zero(it->second)) w_.erase(it);
    return *this;
  }

  Scalar weight(BasisIndex idx) const {
    auto it = w_.find(idx);
    return it == w_.end() ? Scalar(0) : it->second;
  }

  const map_type& weights() const noexcept { return w_; }
  bool empty() const noexcept { return w_.empty(); }

  /// Largest referenced index, or nothing for the empty combination.
  std::ptrdiff_t max_index() const {
    return w_.empty() ? -1 : static_cast<std::ptrdiff_t>(w_.rbegin()->first);
  }

  friend bool operator==(const LinComb&, const LinComb&) = default;

 private:
  map_type w_;
};

template <class Scalar>
struct ProductStep {
  LinComb<Scalar> left;
  LinComb<Scalar> right;
  friend bool operator==(const ProductStep&, const ProductStep&) = default;
};

/// Straight-line program for a kernel polynomial: products P_i = L_i * R_i,
/// each factor a linear combination of I, B and earlier products, followed by
/// a final linear combination.
template <class Scalar>
class KernelCircuit {
 public:
  using scalar_type = Scalar;

  KernelCircuit(int radix, std::vector<ProductStep<Scalar>> steps, LinComb<Scalar> final_comb)
      : radix_(radix), steps_(std::move(steps)), final_(std::move(final_comb)) {
    if (radix_ < 2) throw CircuitError("kernel radix must be >= 2");
    for (std::size_t i = 0; i < steps_.size(); ++i) {
      // step i defines P_{i+1} and may use I, B, P_1..P_i
      const auto limit = static_cast<std::ptrdiff_t>(basis_product(i + 1));
      if (steps_[i].left.max_index() >= limit || steps_[i].right.max_index() >= limit) {
        throw CircuitError("step " + std::to_string(i + 1) +
                           " references a product that is not defined before it");
      }
    }
    if (final_.max_index() >= static_cast<std::ptrdiff_t>(basis_product(steps_.size() + 1))) {
      throw CircuitError("final combination references an undefined product");
    }
  }

  int radix() const noexcept { return radix_; }
  /// Number of products (the circuit's cost in GEMMs).
  int products() const noexcept { return static_cast<int>(steps_.size()); }
  const std::vector<ProductStep<Scalar>>& steps() const noexcept { return steps_; }
  const LinComb<Scalar>& final_combination() const noexcept { return final_; }

  friend bool operator==(const KernelCircuit&, const KernelCircuit&) = default;

 private:
  int radix_;
  std::vector<ProductStep<Scalar>> steps_;
  LinComb<Scalar> final_;
};

using ExactCircuit = KernelCircuit<BigRational>;
using FloatCircuit = KernelCircuit<double>;

/// Runs a circuit over any algebra. `combine(lc, bindings)` forms a linear
/// combination of already-bound values; `multiply(a, b)` is the counted
/// product. Bindings are ordered I, B, P_1, ...
template <class Scalar, class Value, class Combine, class Multiply>
Value evaluate_circuit(const KernelCircuit<Scalar>& k, Value identity, Value generator,
                       Combine&& combine, Multiply&& multiply) {
  std::vector<Value> bound;
  bound.reserve(k.steps().size() + 2);
  bound.push_back(std::move(identity));
  bound.push_back(std::move(generator));
  for (const auto& step : k.steps()) {
    Value l = combine(step.left, std::span<const Value>(bound));
    Value r = combine(step.right, std::span<const Value>(bound));
    bound.push_back(multiply(l, r));
  }
  return combine(k.final_combination(), std::span<const Value>(bound));
}

/// Weighted sum of bound polynomials.
template <class Scalar>
Poly<Scalar> lincomb_eval(const LinComb<Scalar>& lc, std::span<const Poly<Scalar>> bindings) {
  Poly<Scalar> out;
  for (const auto& [idx, w] : lc.weights()) {
    if (idx >= bindings.size()) {
      throw UnboundBasisError("basis element " + basis_name(idx) + " is not bound");
    }
    out.add_scaled(w, bindings[idx]);
  }
  return out;
}

/// The kernel polynomial f(z), with I -> 1 and B -> z. Products are kept up
/// to degree cap (no truncation by default).
template <class Scalar>
Poly<Scalar> circuit_eval_truncated(const KernelCircuit<Scalar>& k, const Poly<Scalar>& generator,
                                    std::size_t cap) {
  return evaluate_circuit(
      k, Poly<Scalar>::constant(Scalar(1)), generator,
      [](const LinComb<Scalar>& lc, std::span<const Poly<Scalar>> b) { return lincomb_eval(lc, b); },
      [cap](const Poly<Scalar>& a, const Poly<Scalar>& b) { return poly_mul_truncated(a, b, cap); });
}

template <class Scalar>
Poly<Scalar> circuit_eval_symbolic(const KernelCircuit<Scalar>& k) {
  return circuit_eval_truncated(k, Poly<Scalar>::monomial(1), detail::no_cap);
}

inline FloatCircuit to_float(const ExactCircuit& k) {
  auto conv = [](const LinComb<BigRational>& lc) {
    LinComb<double> out;
    for (const auto& [idx, w] : lc.weights()) out.add(idx, w.to_double());
    return out;
  };
  std::vector<ProductStep<double>> steps;
  for (const auto& s : k.steps()) steps.push_back({conv(s.left), conv(s.right)});
  return FloatCircuit(k.radix(), std::move(steps), conv(k.final_combination()));
}

/// Minimum product count allowed by degree doubling: ceil(log2(m - 1)).
inline int min_products_lower_bound(int m) {
  if (m < 2) throw std::invalid_argument("min_products_lower_bound: radix must be >= 2");
  int p = 0;
  long long reach = 1;  // max degree after p products is 2^p
  while (reach < m - 1) {
    reach *= 2;
    ++p;
  }
  return p;
}

/// Summary of how close a kernel polynomial is to T_m.
struct KernelReport {
  int radix = 0;
  int mu = 0;
  double prefix_error = 0.0;       // max_{j<m} |[f]_j - 1|
  std::vector<double> spillover;   // [f]_m, [f]_{m+1}, ... (trailing zeros trimmed)
  double c = 1.0;                  // 1 - [f]_m
  bool exact = false;
};

/// Report for a kernel polynomial f of radix m evaluated with mu products.
/// `exact` is decided in f's own scalar domain.
template <class Scalar>
KernelReport report_from_poly(const Poly<Scalar>& f, int m, int mu) {
  KernelReport r;
  r.radix = m;
  r.mu = mu;
  bool exact = true;
  Scalar worst(0);
  for (int j = 0; j < m; ++j) {
    Scalar dev = f[static_cast<std::size_t>(j)] - Scalar(1);
    if (!is_zero(dev)) exact = false;
    using std::abs;
    Scalar a = abs(dev);
    if (a > worst) worst = a;
  }
  r.prefix_error = to_double(worst);
  const auto deg = f.degree();
  for (std::ptrdiff_t j = m; j <= deg; ++j) {
    const Scalar& v = f[static_cast<std::size_t>(j)];
    if (!is_zero(v)) exact = false;
    r.spillover.push_back(to_double(v));
  }
  r.c = to_double(Scalar(1) - f[static_cast<std::size_t>(m)]);
  r.exact = exact;
  return r;
}

template <class Scalar>
KernelReport kernel_report(const KernelCircuit<Scalar>& k) {
  return report_from_poly(circuit_eval_symbolic(k), k.radix(), k.products());
}

}  // namespace neumann
