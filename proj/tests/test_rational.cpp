#include <gtest/gtest.h>

#include "neumann/rational.hpp"

using neumann::BigRational;

TEST(BigRational, CanonicalForm) {
  const BigRational r(6, -8);
  EXPECT_EQ(r.str(), "-3/4");
  EXPECT_EQ(r.denominator(), 4);
  EXPECT_EQ(BigRational(0, 5).str(), "0/1");
}

TEST(BigRational, ZeroDenominatorThrows) { EXPECT_ANY_THROW(BigRational(1, 0)); }

TEST(BigRational, ParseRoundTrip) {
  for (const char* s : {"767/800", "-1/8", "15/32", "3/20", "0/1"}) {
    EXPECT_EQ(BigRational::parse(s).str(), s);
  }
  EXPECT_EQ(BigRational::parse("7"), BigRational(7));
  EXPECT_EQ(BigRational::parse("10/4"), BigRational(5, 2));
  EXPECT_ANY_THROW(BigRational::parse("1/0"));
  EXPECT_ANY_THROW(BigRational::parse("abc"));
}

TEST(BigRational, Arithmetic) {
  const BigRational a(3, 20), b(11, 40);
  EXPECT_EQ(a + b, BigRational(17, 40));
  EXPECT_EQ(a - b, BigRational(-1, 8));
  EXPECT_EQ(a * b, BigRational(33, 800));
  EXPECT_EQ(a / b, BigRational(6, 11));
  EXPECT_LT(a, b);
  EXPECT_EQ(abs(BigRational(-2, 3)), BigRational(2, 3));
  EXPECT_DOUBLE_EQ(BigRational(767, 800).to_double(), 0.95875);
}

TEST(BigRational, NoOverflowOnLargeProducts) {
  BigRational x(1, 3);
  for (int i = 0; i < 200; ++i) x *= BigRational(1, 3);
  EXPECT_FALSE(x.is_zero());
  EXPECT_EQ(x.numerator(), 1);
}
