#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "neumann/circuit.hpp"
#include "neumann/circuit_io.hpp"

namespace neumann {

struct KernelEntry {
  std::string name;
  int radix = 0;
  std::optional<AnyCircuit> circuit;
  std::optional<FloatPoly> coefficients;
  std::string provenance;

  bool has_circuit() const noexcept { return circuit.has_value(); }
  bool is_exact_domain() const noexcept {
    return circuit && std::holds_alternative<ExactCircuit>(*circuit);
  }

  int products() const {
    if (!circuit) throw CircuitError("kernel '" + name + "' has no circuit");
    return std::visit([](const auto& k) { return k.products(); }, *circuit);
  }

  /// The circuit in binary64, converting exact weights when needed.
  FloatCircuit float_circuit() const {
    if (!circuit) throw CircuitError("kernel '" + name + "' has no circuit");
    if (const auto* e = std::get_if<ExactCircuit>(&*circuit)) return to_float(*e);
    return std::get<FloatCircuit>(*circuit);
  }

  /// Kernel polynomial in binary64 (circuit evaluation or stored vector).
  FloatPoly float_poly() const {
    if (circuit) return circuit_eval_symbolic(float_circuit());
    return *coefficients;
  }

  KernelReport report() const {
    if (circuit) return std::visit([](const auto& k) { return kernel_report(k); }, *circuit);
    return report_from_poly(*coefficients, radix, 0);
  }
};

namespace kernels {

using R = BigRational;
using LC = LinComb<BigRational>;
constexpr BasisIndex I = basis_identity;
constexpr BasisIndex B = basis_generator;
constexpr BasisIndex P1 = basis_product(1);
constexpr BasisIndex P2 = basis_product(2);
constexpr BasisIndex P3 = basis_product(3);
constexpr BasisIndex P4 = basis_product(4);

// f(z) = 1 + z, no products.
inline ExactCircuit binary() { return ExactCircuit(2, {}, LC{{I, R(1)}, {B, R(1)}}); }

// U = B^2; T_3 = I + B + U.
inline ExactCircuit ternary() {
  return ExactCircuit(3, {{LC{{B, R(1)}}, LC{{B, R(1)}}}}, LC{{I, R(1)}, {B, R(1)}, {P1, R(1)}});
}

// U = B^2; V = U (B + U) = B^3 + B^4; T_5 = I + B + U + V.
inline ExactCircuit quinary() {
  return ExactCircuit(5,
                      {{LC{{B, R(1)}}, LC{{B, R(1)}}},
                       {LC{{P1, R(1)}}, LC{{B, R(1)}, {P1, R(1)}}}},
                      LC{{I, R(1)}, {B, R(1)}, {P1, R(1)}, {P2, R(1)}});
}

// U = B^2; V = U (B + 2U) = B^3 + 2B^4;
// W = (3/20 B + 2U + V)(11/40 B - 1/8 U + 1/4 V);
// T_9 = W + I + B + 767/800 U + 15/32 V.
inline ExactCircuit radix9() {
  return ExactCircuit(
      9,
      {{LC{{B, R(1)}}, LC{{B, R(1)}}},
       {LC{{P1, R(1)}}, LC{{B, R(1)}, {P1, R(2)}}},
       {LC{{B, R(3, 20)}, {P1, R(2)}, {P2, R(1)}}, LC{{B, R(11, 40)}, {P1, R(-1, 8)}, {P2, R(1, 4)}}}},
      LC{{I, R(1)}, {B, R(1)}, {P1, R(767, 800)}, {P2, R(15, 32)}, {P3, R(1)}});
}

// Approximate 4-product radix-15 kernel with weights at three printed decimals.
inline FloatCircuit radix15_fixture() {
  using F = LinComb<double>;
  return FloatCircuit(
      15,
      {{F{{B, 1.0}}, F{{B, 1.0}}},
       {F{{I, 0.238}, {B, 0.241}, {P1, 1.574}}, F{{I, 0.048}, {B, -0.047}, {P1, 0.889}}},
       {F{{I, 0.263}, {B, 0.919}, {P1, 0.842}, {P2, 0.819}},
        F{{I, 0.184}, {B, 0.068}, {P1, 0.134}, {P2, -1.405}}},
       {F{{I, -0.005}, {B, -1.385}, {P1, 0.022}, {P2, 0.122}, {P3, 0.275}},
        F{{I, -0.701}, {B, 0.602}, {P1, -0.624}, {P2, -0.137}, {P3, 0.328}}}},
      F{{I, 1.0}, {B, 0.078}, {P1, 1.778}, {P2, 0.664}, {P3, -0.024}, {P4, 1.0}});
}

// High-precision radix-15 kernel found by kernel search (see
// tools `search --radix 15 --products 4 --starts 200 --seed 1`), same ansatz
// as the fixture. Weights are stored with 17 significant digits.
inline FloatCircuit radix15_regenerated();

// Degree-32 coefficient vector of a 5-product approximate radix-33 kernel
// (two printed decimals). No circuit is published for it.
inline FloatPoly radix33_coefficients() {
  return FloatPoly(std::vector<double>{
      1.00, 1.00, 1.00, 0.98, 1.00, 1.02, 1.00, 0.69, 1.12, 0.99, 1.05,  //
      0.88, 1.11, 0.69, 0.73, 1.01, 1.27, 1.04, 1.08, 1.06, 0.98, 1.00,  //
      0.99, 0.88, 1.13, 0.95, 1.02, 0.97, 1.01, 0.99, 1.00, 1.00, 1.00});
}

}  // namespace kernels

inline const std::vector<int>& builtin_radices() {
  static const std::vector<int> r{2, 3, 5, 9, 15, 33};
  return r;
}

/// Built-in kernel for radix m in {2, 3, 5, 9, 15, 33}.
inline KernelEntry builtin(int m) {
  KernelEntry e;
  e.radix = m;
  switch (m) {
    case 2:
      e.name = "binary";
      e.circuit = kernels::binary();
      e.provenance = "f(z) = 1 + z (binary splitting / Hensel lifting)";
      break;
    case 3:
      e.name = "ternary";
      e.circuit = kernels::ternary();
      e.provenance = "naive ternary kernel, one product for B^2";
      break;
    case 5:
      e.name = "quinary";
      e.circuit = kernels::quinary();
      e.provenance = "quinary kernel of Gustafsson et al., 2 products";
      break;
    case 9:
      e.name = "radix9";
      e.circuit = kernels::radix9();
      e.provenance = "exact rational radix-9 kernel, 3 products";
      break;
    case 15: {
      e.name = "radix15";
      auto k = kernels::radix15_fixture();
      e.coefficients = circuit_eval_symbolic(k);
      e.circuit = std::move(k);
      e.provenance = "approximate radix-15 kernel, 4 products, 3-decimal weights";
      break;
    }
    case 33:
      e.name = "radix33";
      e.coefficients = kernels::radix33_coefficients();
      e.provenance = "approximate radix-33 coefficient vector, 2-decimal values";
      break;
    default:
      throw UnsupportedRadixError("no built-in kernel for radix " + std::to_string(m));
  }
  return e;
}

inline KernelEntry regenerated_radix15() {
  KernelEntry e;
  e.name = "radix15-hp";
  e.radix = 15;
  auto k = kernels::radix15_regenerated();
  e.coefficients = circuit_eval_symbolic(k);
  e.circuit = std::move(k);
  e.provenance = "radix-15 kernel regenerated by multistart search (seed 1, 200 starts)";
  return e;
}

/// Every registry entry: the built-ins followed by the regenerated radix-15.
inline std::vector<KernelEntry> registry() {
  std::vector<KernelEntry> out;
  for (int m : builtin_radices()) out.push_back(builtin(m));
  out.push_back(regenerated_radix15());
  return out;
}

inline KernelEntry kernel_by_name(const std::string& name) {
  for (auto& e : registry()) {
    if (e.name == name) return e;
  }
  throw UnsupportedRadixError("unknown kernel '" + name + "'");
}

/// True iff the rational circuit evaluates to T_m exactly.
inline bool verify_exact(const KernelEntry& entry) {
  if (!entry.circuit) throw ApproximateKernelError("kernel '" + entry.name + "' has no circuit");
  const auto* k = std::get_if<ExactCircuit>(&*entry.circuit);
  if (!k) {
    throw ApproximateKernelError("kernel '" + entry.name +
                                 "' is a float circuit; cannot certify exactness");
  }
  return circuit_eval_symbolic(*k) == RationalPoly::ones(static_cast<std::size_t>(k->radix()));
}

}  // namespace neumann

#include "neumann/kernels_regenerated.hpp"
