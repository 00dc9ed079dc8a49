#include <gtest/gtest.h>

#include "neumann/kernels.hpp"

using namespace neumann;

TEST(Registry, BuiltinProductCounts) {
  const std::map<int, int> mu{{2, 0}, {3, 1}, {5, 2}, {9, 3}, {15, 4}};
  for (const auto& [m, p] : mu) EXPECT_EQ(builtin(m).products(), p) << m;
}

TEST(Registry, LowerBoundAttainedForOptimizedKernels) {
  for (int m : {5, 9, 15}) EXPECT_EQ(builtin(m).products(), min_products_lower_bound(m)) << m;
}

TEST(Registry, UnsupportedRadix) {
  EXPECT_THROW(builtin(7), UnsupportedRadixError);
  EXPECT_THROW(kernel_by_name("radix7"), UnsupportedRadixError);
}

TEST(Registry, EntryShapes) {
  for (const auto& e : registry()) {
    if (e.radix == 15) {
      EXPECT_TRUE(e.circuit && e.coefficients) << e.name;
    } else {
      EXPECT_NE(e.circuit.has_value(), e.coefficients.has_value()) << e.name;
    }
  }
  EXPECT_EQ(kernel_by_name("radix15-hp").radix, 15);
}

TEST(Registry, Radix33Coefficients) {
  const auto e = builtin(33);
  ASSERT_TRUE(e.coefficients);
  EXPECT_FALSE(e.circuit);
  EXPECT_EQ(e.coefficients->size(), 33u);
  EXPECT_DOUBLE_EQ((*e.coefficients)[7], 0.69);
  EXPECT_DOUBLE_EQ((*e.coefficients)[16], 1.27);
  EXPECT_THROW(e.products(), CircuitError);
}

TEST(VerifyExact, CertifiesExactKernels) {
  for (int m : {2, 3, 5, 9}) EXPECT_TRUE(verify_exact(builtin(m))) << m;
}

TEST(VerifyExact, CorruptedRadix9Fails) {
  auto e = builtin(9);
  const auto& k = std::get<ExactCircuit>(*e.circuit);
  auto fin = k.final_combination();
  fin.add(basis_product(1), BigRational(-1, 800));  // 767/800 -> 766/800
  e.circuit = ExactCircuit(9, k.steps(), fin);
  EXPECT_FALSE(verify_exact(e));
}

TEST(VerifyExact, RefusesFloatCircuits) {
  EXPECT_THROW(verify_exact(builtin(15)), ApproximateKernelError);
  EXPECT_THROW(verify_exact(builtin(33)), ApproximateKernelError);
}

TEST(Radix15, FixtureMeasuredPrefixError) {
  const auto r = builtin(15).report();
  EXPECT_TRUE(std::isfinite(r.prefix_error));
  EXPECT_GT(r.prefix_error, 9e-7);  // the printed weights cannot reach the claimed bound
  EXPECT_LT(r.prefix_error, 1e-2);
  ASSERT_GE(r.spillover.size(), 2u);
  EXPECT_NEAR(r.spillover[0], 0.185, 0.02);
  EXPECT_NEAR(r.spillover[1], 0.458, 0.05);
}

TEST(Radix15, RegeneratedKernelIsAccurate) {
  const auto r = regenerated_radix15().report();
  EXPECT_LT(r.prefix_error, 1e-5);
  EXPECT_EQ(r.mu, 4);
  EXPECT_GT(std::abs(r.c), 0.0);
  EXPECT_LT(std::abs(r.c), 2.0);
}

TEST(Radix15, StoredCoefficientsMatchCircuit) {
  const auto e = builtin(15);
  EXPECT_EQ(*e.coefficients, circuit_eval_symbolic(std::get<FloatCircuit>(*e.circuit)));
}
