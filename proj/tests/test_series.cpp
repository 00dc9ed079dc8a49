#include <gtest/gtest.h>

#include "neumann/errormap.hpp"
#include "neumann/series.hpp"

using namespace neumann;
using R = BigRational;

namespace {

DenseMatrix test_matrix(int d = 12, double alpha = 0.8, std::uint64_t seed = 3) {
  SpectrumSpec s;
  s.kind = SpectrumKind::normal_random;
  s.dim = d;
  s.alpha = alpha;
  s.seed = seed;
  return generate(s).matrix;
}

double rel_diff(const DenseMatrix& a, const DenseMatrix& b) { return (a - b).frobenius_norm() / b.frobenius_norm(); }

}  // namespace

TEST(EvalNaive, ProductCounts) {
  const auto A = test_matrix();
  for (int k : {1, 4, 125}) {
    GemmCounter c;
    eval_naive(A, k, c);
    EXPECT_EQ(c.count(), static_cast<std::uint64_t>(k - 1));
  }
  GemmCounter c;
  EXPECT_EQ(eval_naive(A, 1, c), DenseMatrix::identity(12));
}

TEST(EvalNaive, FourTerms) {
  const auto A = test_matrix(5);
  GemmCounter c;
  auto A2 = gemm(A, A, c);
  auto A3 = gemm(A2, A, c);
  auto want = DenseMatrix::identity(5) + A + A2 + A3;
  EXPECT_LE(rel_diff(eval_naive(A, 4, c), want), 1e-14);
}

TEST(EvalRadixNaive, ProductCounts) {
  const auto A = test_matrix();
  GemmCounter c2;
  eval_radix_naive(A, 2, 9, c2);
  EXPECT_EQ(c2.count(), 18u);
  GemmCounter c3;
  eval_radix_naive(A, 3, 4, c3);
  EXPECT_EQ(c3.count(), 12u);
}

TEST(EvalRadixNaive, BinaryMatchesNaive) {
  const auto A = test_matrix();
  GemmCounter c;
  const auto S = eval_radix_naive(A, 2, 7, c);
  EXPECT_LE(rel_diff(S, eval_naive(A, 128, c)), 1e-10);
}

TEST(Telescope, Table2Counts) {
  const auto A = test_matrix();
  struct Row { int m, t; std::uint64_t products; };
  for (const auto& r : {Row{9, 3, 15}, Row{5, 4, 16}, Row{9, 2, 10}, Row{5, 3, 12}}) {
    GemmCounter c;
    const auto st = eval_kernel_telescope(A, builtin(r.m), r.t, c);
    EXPECT_EQ(c.count(), r.products) << r.m << "^" << r.t;
    EXPECT_EQ(st.ledger.actual(), static_cast<long long>(c.count()));
    EXPECT_EQ(st.ledger.model(), predict_cost(r.m, builtin(r.m).products(), r.t).total);
  }
}

TEST(Telescope, FirstStepSavingIsOptional) {
  const auto A = test_matrix();
  GemmCounter c;
  SeriesOptions opt;
  opt.skip_first_concat = true;
  const auto st = eval_kernel_telescope(A, builtin(9), 3, c, opt);
  EXPECT_EQ(c.count(), 14u);
  EXPECT_EQ(st.ledger.model(), 15);
  EXPECT_EQ(st.ledger.steps.front().concat, 0);
  GemmCounter c0;
  const auto full = eval_kernel_telescope(A, builtin(9), 3, c0);
  EXPECT_LE(rel_diff(st.sum, full.sum), 1e-12);
}

TEST(Telescope, TracksPower) {
  const auto A = test_matrix(8, 0.95);
  GemmCounter c;
  const auto st = eval_kernel_telescope(A, builtin(5), 2, c);
  EXPECT_EQ(st.k(), 25u);
  auto P = A;
  for (int i = 1; i < 25; ++i) P = gemm(P, A, c);
  EXPECT_LE((st.companion - P).frobenius_norm(), 1e-10 * (1.0 + P.frobenius_norm()));
}

TEST(Telescope, RefusesApproximateKernels) {
  const auto A = test_matrix();
  GemmCounter c;
  EXPECT_THROW(eval_kernel_telescope(A, builtin(15), 1, c), ApproximateKernelError);
  EXPECT_THROW(eval_kernel_telescope(A, builtin(33), 1, c), ApproximateKernelError);
  EXPECT_EQ(c.count(), 0u);
}

TEST(GeneralRadix, Radix15Counts) {
  const auto A = test_matrix();
  for (int t : {2, 3}) {
    GemmCounter c;
    const auto st = eval_general_radix(A, builtin(15), t, c);
    EXPECT_EQ(c.count(), static_cast<std::uint64_t>(6 * t));
    EXPECT_EQ(st.ledger.actual(), static_cast<long long>(c.count()));
  }
}

TEST(GeneralRadix, ExactKernelMatchesTelescoping) {
  const auto A = test_matrix();
  GemmCounter c1, c2;
  const auto a = eval_general_radix(A, builtin(9), 2, c1);
  const auto b = eval_kernel_telescope(A, builtin(9), 2, c2);
  EXPECT_EQ(c1.count(), c2.count());
  EXPECT_LE(rel_diff(a.sum, b.sum), 1e-9);
}

TEST(GeneralRadix, ResidualIdentityEveryStep) {
  const auto A = test_matrix(16, 0.9);
  auto run = SeriesRun::residual(A, kernels::radix15_regenerated());
  const auto M = DenseMatrix::identity(16) - A;
  GemmCounter c, probe;
  for (int n = 0; n < 3; ++n) {
    run.step(c);
    const auto& st = run.state();
    auto direct = -1.0 * gemm(M, st.sum, probe);
    direct.add_identity(1.0);
    EXPECT_LE((st.companion - direct).frobenius_norm(), 1e-10 * std::max(st.companion.frobenius_norm(), 1e-300));
  }
}

TEST(GeneralRadix, RejectsBadPrefix) {
  const auto A = test_matrix();
  using F = LinComb<double>;
  const FloatCircuit bad(3, {}, F{{basis_identity, 1.0}, {basis_generator, 0.5}});
  EXPECT_THROW(SeriesRun::residual(A, bad), PrefixConditionError);
}

TEST(Hensel, CountsAndValues) {
  const auto A = test_matrix();
  GemmCounter c0;
  EXPECT_EQ(eval_hensel(A, 0, c0), DenseMatrix::identity(12));
  EXPECT_EQ(c0.count(), 0u);
  GemmCounter c;
  const auto S = eval_hensel(A, 5, c);
  EXPECT_EQ(c.count(), 10u);
  GemmCounter cn;
  EXPECT_LE(rel_diff(S, eval_naive(A, 32, cn)), 1e-10);
  EXPECT_DOUBLE_EQ(predict_cost(2, 0, 5).coefficient, 2.0);
}

TEST(ExactMethods, AgreeWithNaive) {
  for (int d : {4, 16}) {
    const auto A = test_matrix(d, 0.9, 10 + static_cast<std::uint64_t>(d));
    GemmCounter c;
    const auto S81 = eval_naive(A, 81, c);
    const auto S25 = eval_naive(A, 25, c);
    const auto S64 = eval_naive(A, 64, c);
    EXPECT_LE(rel_diff(eval_radix_naive(A, 3, 4, c), S81), 1e-9);
    EXPECT_LE(rel_diff(eval_radix_naive(A, 2, 6, c), S64), 1e-9);
    EXPECT_LE(rel_diff(eval_kernel_telescope(A, builtin(9), 2, c).sum, S81), 1e-9);
    EXPECT_LE(rel_diff(eval_kernel_telescope(A, builtin(5), 2, c).sum, S25), 1e-9);
    EXPECT_LE(rel_diff(eval_kernel_telescope(A, builtin(3), 4, c).sum, S81), 1e-9);
    EXPECT_LE(rel_diff(eval_hensel(A, 6, c), S64), 1e-9);
    EXPECT_LE(rel_diff(eval_general_radix(A, builtin(9), 2, c).sum, S81), 1e-9);
    EXPECT_LE(rel_diff(eval_general_radix(A, builtin(5), 2, c).sum, S25), 1e-9);
  }
}

TEST(ExactMethods, MonotoneResidualForNormalMatrices) {
  const auto A = test_matrix(32, 0.95);
  for (int m : {2, 5, 9}) {
    auto run = SeriesRun::residual(A, builtin(m).float_circuit());
    GemmCounter c;
    double prev = residual_normalized(A, run.state().sum);
    for (int n = 0; n < 5; ++n) {
      run.step(c);
      const double r = residual_normalized(A, run.state().sum);
      if (prev > 1e-13) {
        EXPECT_LE(r, prev * (1 + 1e-12)) << m << " step " << n;
      }
      prev = r;
    }
  }
}

TEST(IterateSymbolic, ExactRadix9) {
  const auto Y = iterate_symbolic(kernels::radix9(), 2, 100);
  EXPECT_EQ(Y, RationalPoly::ones(81));
}

TEST(IterateSymbolic, Hensel) {
  EXPECT_EQ(iterate_symbolic(kernels::binary(), 3, 40), RationalPoly::ones(8));
}

TEST(IterateSymbolic, Radix15FixtureFirstStep) {
  const auto k = kernels::radix15_fixture();
  const auto Y = iterate_symbolic(k, 1, 20);
  const double pe = kernel_report(k).prefix_error;
  for (std::size_t j = 0; j < 15; ++j) EXPECT_NEAR(Y[j], 1.0, pe);
}

TEST(IterateSymbolic, ResidualIsComposedErrorMap) {
  const auto f = circuit_eval_symbolic(kernels::radix9());
  const std::size_t cap = 100;
  const auto st = iterate_symbolic_state(kernels::radix9(), 2, cap);
  const auto e = error_map(f, 9, cap);
  EXPECT_EQ(st.R, compose_error(e, 2, cap));

  const auto quin = kernels::quinary();
  const auto st5 = iterate_symbolic_state(quin, 2, 40);
  EXPECT_EQ(st5.R, compose_error(error_map(circuit_eval_symbolic(quin), 5, 40), 2, 40));
}

TEST(IterateSymbolic, SpilloverKernelResidualLaw) {
  // f = T_3 + z^3/2 + z^4/4: exact prefix, spillover; R_n = E^[n] through cap.
  const RationalPoly f({R(1), R(1), R(1), R(1, 2), R(1, 4)});
  using LC = LinComb<R>;
  // P1 = B * B, P2 = P1 * (B/2 + P1/4) = z^3/2 + z^4/4
  const ExactCircuit k(3,
                       {{LC{{basis_generator, R(1)}}, LC{{basis_generator, R(1)}}},
                        {LC{{basis_product(1), R(1)}}, LC{{basis_generator, R(1, 2)}, {basis_product(1), R(1, 4)}}}},
                       LC{{basis_identity, R(1)}, {basis_generator, R(1)}, {basis_product(1), R(1)},
                          {basis_product(2), R(1)}});
  ASSERT_EQ(circuit_eval_symbolic(k), f);
  const std::size_t cap = 30;
  const auto e = error_map(f, 3, cap);
  for (int n = 0; n <= 3; ++n) {
    const auto st = iterate_symbolic_state(k, n, cap);
    EXPECT_EQ(st.R, compose_error(e, n, cap)) << n;
    std::size_t prefix = 1;
    for (int i = 0; i < n; ++i) prefix *= 3;
    for (std::size_t j = 0; j < std::min(prefix, cap); ++j) EXPECT_EQ(st.Y[j], R(1)) << n << " " << j;
  }
}

TEST(PredictCost, Coefficients) {
  EXPECT_NEAR(predict_cost(9, 3, 1).coefficient, 1.58, 0.005);
  EXPECT_NEAR(predict_cost(15, 4, 1).coefficient, 1.54, 0.005);
  EXPECT_NEAR(predict_cost(5, 2, 1).coefficient, 1.72, 0.005);
  EXPECT_EQ(predict_cost(9, 3, 3).total, 15);
  EXPECT_THROW(predict_cost(1, 0, 1), std::invalid_argument);
}
