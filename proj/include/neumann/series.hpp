#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neumann/circuit.hpp"
#include "neumann/errors.hpp"
#include "neumann/kernels.hpp"
#include "neumann/matrix.hpp"

namespace neumann {

/// Kernel circuit applied to a matrix argument B. Exactly k.products() GEMMs.
inline DenseMatrix evaluate_on_matrix(const FloatCircuit& k, const DenseMatrix& B, GemmCounter& counter) {
  const int d = B.dim();
  auto combine = [d](const LinComb<double>& lc, std::span<const DenseMatrix> bound) {
    const auto& w = lc.weights();
    if (w.size() == 1 && w.begin()->first != basis_identity && w.begin()->second == 1.0) {
      return bound[w.begin()->first];
    }
    auto out = DenseMatrix::zeros(d);
    for (const auto& [idx, weight] : w) {
      if (idx >= bound.size()) throw UnboundBasisError("basis element " + basis_name(idx) + " is not bound");
      if (idx == basis_identity) {
        out.add_identity(weight);
      } else {
        out.add_scaled(weight, bound[idx]);
      }
    }
    return out;
  };
  auto multiply = [&counter](const DenseMatrix& a, const DenseMatrix& b) { return gemm(a, b, counter); };
  // The identity slot is never read as a matrix; combine() adds it to the diagonal.
  return evaluate_circuit(k, DenseMatrix{}, B, combine, multiply);
}

/// How an update spends its products.
struct StepCost {
  int kernel = 0;  // kernel evaluation (mu, or m - 2 naive powers)
  int concat = 0;  // S_n * T or Y_n * f(R_n)
  int update = 0;  // next power or next residual
  int total() const noexcept { return kernel + concat + update; }
};

struct CostLedger {
  std::vector<StepCost> steps;
  long long model_per_step = 0;

  long long actual() const {
    long long s = 0;
    for (const auto& c : steps) s += c.total();
    return s;
  }
  /// Cost model without the first-step saving: per-step cost times steps.
  long long model() const { return model_per_step * static_cast<long long>(steps.size()); }
};

struct SeriesOptions {
  /// S_1 = I (Y_0 = I) makes the first concatenation a copy; when set the
  /// product is skipped and the ledger shows concat = 0 for step 1.
  bool skip_first_concat = false;
  /// Largest kernel prefix error accepted by the residual iteration.
  double prefix_tolerance = 1e-2;
};

enum class SeriesMode { splitting, telescoping, residual };

/// Evolving state of one evaluation run.
struct SeriesState {
  SeriesMode mode = SeriesMode::splitting;
  int radix = 2;
  int step = 0;
  DenseMatrix sum;        // S_{m^n} (splitting, telescoping) or Y_n (residual)
  DenseMatrix companion;  // A^{m^n} (splitting, telescoping) or R_n = I - (I - A) Y_n
  CostLedger ledger;

  /// Series length m^step, saturating at uint64 max.
  std::uint64_t k() const {
    std::uint64_t out = 1;
    for (int i = 0; i < step; ++i) {
      if (out > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(radix)) {
        return std::numeric_limits<std::uint64_t>::max();
      }
      out *= static_cast<std::uint64_t>(radix);
    }
    return out;
  }

  /// ||companion||_F / sqrt(d). In exact arithmetic this is the normalized
  /// residual of `sum` (A^k = I - (I - A) S_k for the power-tracking modes).
  double companion_normalized() const {
    return companion.frobenius_norm() / std::sqrt(static_cast<double>(companion.dim()));
  }
};

namespace detail {
inline bool kernel_is_exact(const KernelEntry& entry) {
  if (!entry.circuit) return false;
  if (entry.is_exact_domain()) return verify_exact(entry);
  return entry.report().exact;
}
}  // namespace detail

/// Stepper for the radix algorithms. Each step() multiplies the series
/// length by the radix.
class SeriesRun {
 public:
  /// Radix-m splitting with naive kernel: m - 2 powers, 1 concatenation,
  /// 1 next power per step.
  static SeriesRun splitting(const DenseMatrix& A, int m, SeriesOptions opt = {}) {
    if (m < 2) throw std::invalid_argument("splitting: radix must be >= 2");
    SeriesRun r(A, opt);
    r.state_.mode = SeriesMode::splitting;
    r.state_.radix = m;
    r.state_.companion = A;
    r.state_.ledger.model_per_step = m;
    return r;
  }

  /// Exact-kernel telescoping: (S_n, A^n) -> (S_{mn}, A^{mn}) with
  /// A^{mn} = I - T_m(A^n)(I - A^n).
  static SeriesRun telescoping(const DenseMatrix& A, const KernelEntry& entry, SeriesOptions opt = {}) {
    if (!entry.circuit) throw ApproximateKernelError("kernel '" + entry.name + "' has no circuit");
    if (!detail::kernel_is_exact(entry)) {
      throw ApproximateKernelError("kernel '" + entry.name +
                                   "' has spillover; telescoping is invalid, use the residual iteration");
    }
    SeriesRun r(A, opt);
    r.kernel_ = entry.float_circuit();
    r.state_.mode = SeriesMode::telescoping;
    r.state_.radix = entry.radix;
    r.state_.companion = A;
    r.state_.ledger.model_per_step = r.kernel_->products() + 2;
    return r;
  }

  /// Residual iteration Y_{n+1} = Y_n f(R_n), R_{n+1} = I - (I - A) Y_{n+1},
  /// starting from Y_0 = I, R_0 = A. Works for exact and approximate kernels.
  static SeriesRun residual(const DenseMatrix& A, const FloatCircuit& kernel, SeriesOptions opt = {}) {
    const auto rep = kernel_report(kernel);
    if (!(rep.prefix_error <= opt.prefix_tolerance)) {
      throw PrefixConditionError("kernel prefix error " + std::to_string(rep.prefix_error) +
                                 " exceeds tolerance " + std::to_string(opt.prefix_tolerance));
    }
    SeriesRun r(A, opt);
    r.kernel_ = kernel;
    r.state_.mode = SeriesMode::residual;
    r.state_.radix = kernel.radix();
    r.state_.companion = A;
    r.state_.ledger.model_per_step = kernel.products() + 2;
    r.M_ = DenseMatrix::identity(A.dim()) - A;
    return r;
  }

  void step(GemmCounter& counter) {
    switch (state_.mode) {
      case SeriesMode::splitting: step_splitting(counter); break;
      case SeriesMode::telescoping: step_telescoping(counter); break;
      case SeriesMode::residual: step_residual(counter); break;
    }
    ++state_.step;
  }

  void run(int t, GemmCounter& counter) {
    for (int i = 0; i < t; ++i) step(counter);
  }

  const SeriesState& state() const noexcept { return state_; }
  SeriesState take_state() && { return std::move(state_); }

 private:
  SeriesRun(const DenseMatrix& A, SeriesOptions opt) : opt_(opt) {
    state_.sum = DenseMatrix::identity(A.dim());
  }

  bool concat_is_free() const { return opt_.skip_first_concat && state_.step == 0; }

  // sum <- sum * T, or sum <- T on a skipped first step.
  int concatenate(DenseMatrix T, GemmCounter& counter) {
    if (concat_is_free()) {
      state_.sum = std::move(T);
      return 0;
    }
    const auto before = counter.count();
    state_.sum = gemm(state_.sum, T, counter);
    return static_cast<int>(counter.count() - before);
  }

  void step_splitting(GemmCounter& counter) {
    const int m = state_.radix;
    const DenseMatrix& B = state_.companion;
    StepCost cost;
    auto before = counter.count();
    auto T = B;
    T.add_identity(1.0);
    DenseMatrix power = B;
    for (int j = 2; j <= m - 1; ++j) {
      power = gemm(power, B, counter);
      T += power;
    }
    cost.kernel = static_cast<int>(counter.count() - before);
    cost.concat = concatenate(std::move(T), counter);
    before = counter.count();
    state_.companion = gemm(power, B, counter);
    cost.update = static_cast<int>(counter.count() - before);
    state_.ledger.steps.push_back(cost);
  }

  void step_telescoping(GemmCounter& counter) {
    const DenseMatrix& B = state_.companion;
    StepCost cost;
    auto before = counter.count();
    auto T = evaluate_on_matrix(*kernel_, B, counter);
    cost.kernel = static_cast<int>(counter.count() - before);
    // I - B^m = T (I - B)
    auto one_minus_b = -1.0 * B;
    one_minus_b.add_identity(1.0);
    before = counter.count();
    auto next = -1.0 * gemm(T, one_minus_b, counter);
    next.add_identity(1.0);
    cost.update = static_cast<int>(counter.count() - before);
    cost.concat = concatenate(std::move(T), counter);
    state_.companion = std::move(next);
    state_.ledger.steps.push_back(cost);
  }

  void step_residual(GemmCounter& counter) {
    StepCost cost;
    auto before = counter.count();
    auto F = evaluate_on_matrix(*kernel_, state_.companion, counter);
    cost.kernel = static_cast<int>(counter.count() - before);
    cost.concat = concatenate(std::move(F), counter);
    before = counter.count();
    auto R = -1.0 * gemm(*M_, state_.sum, counter);
    R.add_identity(1.0);
    cost.update = static_cast<int>(counter.count() - before);
    state_.companion = std::move(R);
    state_.ledger.steps.push_back(cost);
  }

  SeriesOptions opt_;
  SeriesState state_;
  std::optional<FloatCircuit> kernel_;
  std::optional<DenseMatrix> M_;
};

/// S_k(A) by Horner's rule, S_{j+1} = I + A S_j: exactly k - 1 products.
inline DenseMatrix eval_naive(const DenseMatrix& A, int k, GemmCounter& counter) {
  if (k < 1) throw std::invalid_argument("eval_naive: k must be >= 1");
  auto S = DenseMatrix::identity(A.dim());
  for (int j = 1; j < k; ++j) {
    S = gemm(A, S, counter);
    S.add_identity(1.0);
  }
  return S;
}

/// S_{m^t}(A) by radix-m splitting with naive kernels (m products per step).
inline DenseMatrix eval_radix_naive(const DenseMatrix& A, int m, int t, GemmCounter& counter,
                                    SeriesOptions opt = {}) {
  if (t < 1) throw std::invalid_argument("eval_radix_naive: t must be >= 1");
  auto run = SeriesRun::splitting(A, m, opt);
  run.run(t, counter);
  return std::move(run).take_state().sum;
}

/// S_{m^t}(A) with an exact kernel and telescoping power extraction.
inline SeriesState eval_kernel_telescope(const DenseMatrix& A, const KernelEntry& entry, int t,
                                         GemmCounter& counter, SeriesOptions opt = {}) {
  if (t < 1) throw std::invalid_argument("eval_kernel_telescope: t must be >= 1");
  auto run = SeriesRun::telescoping(A, entry, opt);
  run.run(t, counter);
  return std::move(run).take_state();
}

/// t steps of the residual iteration with any kernel circuit.
inline SeriesState eval_general_radix(const DenseMatrix& A, const FloatCircuit& kernel, int t,
                                      GemmCounter& counter, SeriesOptions opt = {}) {
  if (t < 0) throw std::invalid_argument("eval_general_radix: t must be >= 0");
  auto run = SeriesRun::residual(A, kernel, opt);
  run.run(t, counter);
  return std::move(run).take_state();
}

inline SeriesState eval_general_radix(const DenseMatrix& A, const KernelEntry& entry, int t,
                                      GemmCounter& counter, SeriesOptions opt = {}) {
  return eval_general_radix(A, entry.float_circuit(), t, counter, opt);
}

/// Hensel lifting Y_{n+1} = Y_n (2I - (I - A) Y_n), 2 products per step;
/// returns S_{2^t}(A).
inline DenseMatrix eval_hensel(const DenseMatrix& A, int t, GemmCounter& counter) {
  if (t < 0) throw std::invalid_argument("eval_hensel: t must be >= 0");
  return eval_general_radix(A, to_float(kernels::binary()), t, counter).sum;
}

/// Residual iteration run over the polynomial ring (A -> z), every product
/// truncated at degree cap.
template <class Scalar>
struct SymbolicIterate {
  Poly<Scalar> Y;
  Poly<Scalar> R;
};

template <class Scalar>
SymbolicIterate<Scalar> iterate_symbolic_state(const KernelCircuit<Scalar>& k, int n, std::size_t cap) {
  if (n < 0) throw std::invalid_argument("iterate_symbolic: n must be >= 0");
  SymbolicIterate<Scalar> s{Poly<Scalar>::constant(Scalar(1)), Poly<Scalar>::monomial(1)};
  s.R.truncate(cap);
  const auto one = Poly<Scalar>::constant(Scalar(1));
  for (int i = 0; i < n; ++i) {
    const auto F = circuit_eval_truncated(k, s.R, cap);
    s.Y = poly_mul_truncated(s.Y, F, cap);
    s.R = one - one_minus_z_times(s.Y);
    s.R.truncate(cap);
  }
  return s;
}

template <class Scalar>
Poly<Scalar> iterate_symbolic(const KernelCircuit<Scalar>& k, int n, std::size_t cap) {
  return iterate_symbolic_state(k, n, cap).Y;
}

struct CostPrediction {
  long long total = 0;       // (mu + 2) t
  double coefficient = 0.0;  // (mu + 2) / log2 m, products per doubling of k
};

inline CostPrediction predict_cost(int m, int mu, int t) {
  if (m < 2) throw std::invalid_argument("predict_cost: radix must be >= 2");
  return {static_cast<long long>(mu + 2) * t, (mu + 2) / std::log2(static_cast<double>(m))};
}

}  // namespace neumann
