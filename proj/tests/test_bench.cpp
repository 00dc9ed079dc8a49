#include <gtest/gtest.h>

#include "neumann/bench.hpp"

using namespace neumann;
using namespace neumann::bench;

TEST(Render, Formats) {
  Table t;
  t.columns = {"name", "value", "flag"};
  t.add({"a,b", 1.5, true});
  t.add({"c", nullptr, false});
  EXPECT_EQ(render(t, Format::csv), "name,value,flag\n\"a,b\",1.5,true\nc,,false\n");
  const auto j = json::parse(render(t, Format::json));
  EXPECT_EQ(j[0]["name"], "a,b");
  EXPECT_EQ(j[0]["value"], 1.5);
  EXPECT_TRUE(j[1]["value"].is_null());
  const auto text = render(t, Format::table);
  EXPECT_NE(text.find("name  value  flag"), std::string::npos);
  EXPECT_THROW(t.add({1}), std::logic_error);
  EXPECT_THROW(parse_format("xml"), std::invalid_argument);
}

TEST(Verify, AllClaimsHold) {
  const auto r = cmd_verify();
  EXPECT_TRUE(r.ok);
  for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
    const auto name = r.table.at(i, "name").get<std::string>();
    if (name == "radix9") {
      EXPECT_TRUE(r.table.at(i, "exact").get<bool>());
      EXPECT_EQ(r.table.at(i, "mu"), 3);
    }
    if (name == "radix15") {
      EXPECT_FALSE(r.table.at(i, "exact").get<bool>());
      EXPECT_FALSE(r.table.at(i, "spillover").get<std::string>().empty());
    }
    if (name == "quinary" || name == "radix9" || name == "radix15") {
      EXPECT_TRUE(r.table.at(i, "bound_met").get<bool>());
    }
  }
}

TEST(Costs, Coefficients) {
  const auto t = cmd_costs();
  const std::vector<double> want{2.00, 1.89, 1.72, 1.58, 1.54};
  ASSERT_EQ(t.rows.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(t.at(i, "coefficient").get<double>(), want[i], 0.005);
  EXPECT_EQ(t.at(0, "coefficient").get<double>(), 2.0);
}

TEST(Table2, CountsAtSmallDimension) {
  Table2Options o;
  o.dim = 24;
  o.repeat = 1;
  o.nonnormal = true;
  const auto t = cmd_table2(o);
  const std::vector<std::array<int, 3>> want{{14, 12, 14}, {20, 16, 20}, {14, 10, 29},
                                             {20, 15, 25}, {16, 12, 25}, {24, 18, 25}};
  ASSERT_EQ(t.rows.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_EQ(t.at(i, "binary_products"), want[i][0]);
    EXPECT_EQ(t.at(i, "method_products"), want[i][1]);
    EXPECT_EQ(t.at(i, "savings_pct"), want[i][2]);
    EXPECT_GE(t.at(i, "method_ms").get<double>(), 0.0);
  }
}

TEST(RunMethod, LedgerAndNaive) {
  const auto A = generate(SpectrumSpec{}).matrix;
  const auto r = run_method("quinary", A, 2);
  EXPECT_EQ(r.k, 25u);
  EXPECT_EQ(r.products_actual, 8);
  EXPECT_EQ(r.products_model, 8);
  const auto n = run_method("naive", A, 0, 1, 10);
  EXPECT_EQ(n.products_actual, 9);
  EXPECT_THROW(run_method("radix7", A, 1), std::invalid_argument);
  const auto j = to_json(r);
  EXPECT_EQ(j.begin().key(), "method");
}

TEST(Threshold, ReproducesCounts) {
  const auto A = generate(convergence_spec()).matrix;
  const std::map<std::string, long long> want{
      {"binary", 38}, {"ternary", 36}, {"quinary", 32}, {"radix9", 30}, {"radix15", 30}};
  for (const auto& [method, products] : want) {
    const auto r = run_to_threshold(method, A, 1e-13, 64);
    EXPECT_EQ(r.products, products) << method;
  }
  EXPECT_EQ(run_to_threshold("radix15", A, 1e-13, 64).stop, "floor");
}

TEST(Convergence, ExactMethodsReachMachinePrecision) {
  const auto A = generate(convergence_spec()).matrix;
  ConvergenceOptions o;
  o.max_products = 60;
  const auto t = cmd_convergence(A, o);
  std::map<std::string, double> best;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto m = t.at(i, "method").get<std::string>();
    const double r = t.at(i, "residual_normalized").get<double>();
    best[m] = best.count(m) ? std::min(best[m], r) : r;
  }
  for (const char* m : {"binary", "ternary", "quinary", "radix9", "radix15-hp"}) EXPECT_LE(best[m], 1e-12) << m;
  EXPECT_GT(best["radix15"], 1e-6);
}

TEST(Tradeoff, Values) {
  const auto t = cmd_tradeoff();
  EXPECT_NEAR(t.at(0, "inverse_error").get<double>(), 0.932, 1e-3);
  EXPECT_NEAR(t.at(1, "inverse_error").get<double>(), 0.923, 1e-3);
  const auto last = t.rows.size() - 1;
  EXPECT_EQ(t.at(last, "method"), "radix33");
  EXPECT_NEAR(t.at(last, "inverse_error").get<double>(), 0.722, 0.02 * 0.722);
  const double ratio = t.at(last, "vs_exact").get<double>();
  EXPECT_GE(ratio, 1.0);
  EXPECT_LE(ratio, 1.02);
}

TEST(ErrormapTable, LeadingCoefficients) {
  const auto t = cmd_errormap(registry());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto name = t.at(i, "name").get<std::string>();
    if (name == "radix33") {
      EXPECT_NE(t.at(i, "status").get<std::string>(), "ok");
      continue;
    }
    EXPECT_EQ(t.at(i, "status"), "ok") << name;
    const double got = t.at(i, "leading_1").get<double>();
    EXPECT_NEAR(got, t.at(i, "predicted_1").get<double>(), 1e-12) << name;
  }
}
