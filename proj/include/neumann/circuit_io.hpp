#pragma once

#include <cstdio>
#include <string>
#include <variant>

#include <json.hpp>

#include "neumann/circuit.hpp"

namespace neumann {

// Circuit document:
//   {"radix": 9, "domain": "exact" | "float",
//    "steps": [{"left": {"P1": "1/1"}, "right": {"B": "1/1", "P1": "2/1"}}, ...],
//    "final": {"I": "1/1", ...}}
// Exact weights are "num/den" strings; float weights are decimal strings
// with 17 significant digits (plain JSON numbers are accepted on input).

inline std::string format_scalar(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
inline std::string format_scalar(const BigRational& x) { return x.str(); }

template <class Scalar>
Scalar parse_scalar(const nlohmann::json& j) {
  if constexpr (is_exact_scalar_v<Scalar>) {
    if (j.is_number_integer()) return BigRational(j.get<long>());
    if (!j.is_string()) throw CircuitError("exact weight must be a \"num/den\" string");
    return BigRational::parse(j.get<std::string>());
  } else {
    if (j.is_number()) return j.get<double>();
    if (!j.is_string()) throw CircuitError("float weight must be a number or decimal string");
    const auto s = j.get<std::string>();
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      throw CircuitError("cannot parse float weight '" + s + "'");
    }
    if (pos != s.size()) throw CircuitError("cannot parse float weight '" + s + "'");
    return v;
  }
}

template <class Scalar>
nlohmann::json to_json(const LinComb<Scalar>& lc) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [idx, w] : lc.weights()) j[basis_name(idx)] = format_scalar(w);
  return j;
}

template <class Scalar>
LinComb<Scalar> lincomb_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw CircuitError("linear combination must be a JSON object");
  LinComb<Scalar> lc;
  for (const auto& [name, w] : j.items()) lc.add(parse_basis_name(name), parse_scalar<Scalar>(w));
  return lc;
}

template <class Scalar>
nlohmann::json to_json(const KernelCircuit<Scalar>& k) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : k.steps()) steps.push_back({{"left", to_json(s.left)}, {"right", to_json(s.right)}});
  return {{"radix", k.radix()},
          {"domain", std::string(domain_name<Scalar>())},
          {"steps", std::move(steps)},
          {"final", to_json(k.final_combination())}};
}

using AnyCircuit = std::variant<ExactCircuit, FloatCircuit>;

template <class Scalar>
KernelCircuit<Scalar> circuit_from_json_as(const nlohmann::json& j) {
  try {
    std::vector<ProductStep<Scalar>> steps;
    for (const auto& s : j.at("steps")) {
      steps.push_back({lincomb_from_json<Scalar>(s.at("left")), lincomb_from_json<Scalar>(s.at("right"))});
    }
    return KernelCircuit<Scalar>(j.at("radix").get<int>(), std::move(steps),
                                 lincomb_from_json<Scalar>(j.at("final")));
  } catch (const nlohmann::json::exception& e) {
    throw CircuitError(std::string("malformed circuit document: ") + e.what());
  }
}

inline AnyCircuit circuit_from_json(const nlohmann::json& j) {
  const auto domain = j.value("domain", std::string("float"));
  if (domain == "exact") return circuit_from_json_as<BigRational>(j);
  if (domain == "float") return circuit_from_json_as<double>(j);
  throw CircuitError("unknown scalar domain '" + domain + "'");
}

inline nlohmann::json to_json(const KernelReport& r) {
  return {{"radix", r.radix},   {"mu", r.mu}, {"prefix_error", r.prefix_error},
          {"spillover", r.spillover}, {"c", r.c},  {"exact", r.exact}};
}

}  // namespace neumann
