#include <cmath>

#include <gtest/gtest.h>

#include "vecext/drift.hpp"
#include "vecext/errors.hpp"

using namespace vecext;

TEST(Drift, Evaluate) {
  EXPECT_EQ(evaluate(ZeroDrift{}, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(evaluate(PowerLaw{2.0, 1.5}, -4.0), 16.0);
  EXPECT_DOUBLE_EQ(evaluate(LinearPositive{0.5}, 3.0), 1.5);
  EXPECT_DOUBLE_EQ(evaluate(PowerSum{{{1.0, 1.0}, {2.0, 2.0}}}, -2.0), 10.0);
  EXPECT_DOUBLE_EQ(evaluate(UserDrift{[](double t) { return t * t * t; }}, 2.0), 8.0);
  for (const Drift& d : DriftSpec{ZeroDrift{}, PowerLaw{3.0, 0.7}, LinearPositive{2.0}, PowerSum{{{1.0, 0.5}}}}) {
    EXPECT_EQ(evaluate(d, 0.0), 0.0);
  }
}

TEST(Drift, ScaledMultipliesValues) {
  const DriftSpec ds{PowerLaw{2.0, 1.5}, LinearPositive{0.5}, PowerSum{{{1.0, 1.0}, {2.0, 2.0}}},
                     UserDrift{[](double t) { return std::fabs(t); }, "abs", true}};
  for (const auto& d : ds) {
    for (double t : {-1.3, 0.4, 2.0}) EXPECT_NEAR(evaluate(scaled(d, 2.5), t), 2.5 * evaluate(d, t), 1e-14);
  }
}

TEST(Drift, IdRoundTrip) {
  const DriftSpec ds{ZeroDrift{}, PowerLaw{0.25, 1.5}, LinearPositive{0.1}, PowerSum{{{1.0, 1.0}, {0.3, 2.0}}}};
  for (const auto& d : ds) EXPECT_EQ(drift_id(parse_drift(drift_id(d))), drift_id(d));
  EXPECT_EQ(drift_id(ds), "zero|pow(0.25;1.5)|lin(0.10000000000000001)|pow(1;1)+pow(0.29999999999999999;2)");
  EXPECT_EQ(drift_id(parse_drift("pow:2:1")), "pow(2;1)");
  EXPECT_EQ(drift_id(parse_drift("lin:3")), "lin(3)");
}

TEST(Drift, ParseRejectsGarbage) {
  for (const char* s : {"", "pow(1)", "pow(1;0)", "lin()", "foo", "pow(a;b)", "lin(1)+pow(1;1)"}) {
    EXPECT_THROW(parse_drift(s), DomainError) << s;
  }
}

TEST(Drift, Coercivity) {
  EXPECT_TRUE(coercive_towards(PowerLaw{1.0, 0.5}, -1));
  EXPECT_FALSE(coercive_towards(PowerLaw{-1.0, 0.5}, 1));
  EXPECT_TRUE(coercive_towards(LinearPositive{1.0}, 1));
  EXPECT_FALSE(coercive_towards(LinearPositive{1.0}, -1));
  EXPECT_FALSE(coercive_towards(ZeroDrift{}, 1));
  // top power wins: |t| - |t|^2 -> -inf
  EXPECT_FALSE(coercive_towards(PowerSum{{{1.0, 1.0}, {-1.0, 2.0}}}, 1));
  EXPECT_TRUE(coercive_towards(PowerSum{{{-5.0, 1.0}, {1.0, 2.0}}}, 1));
}

TEST(Drift, PowerLawSum) {
  auto r = power_law_sum({PowerLaw{1.0, 1.5}, ZeroDrift{}, PowerLaw{0.5, 1.5}}, -INFINITY, INFINITY);
  ASSERT_TRUE(r);
  EXPECT_DOUBLE_EQ(r->first, 1.5);
  EXPECT_DOUBLE_EQ(r->second, 1.5);
  EXPECT_FALSE(power_law_sum({PowerLaw{1.0, 1.0}, PowerLaw{1.0, 2.0}}, 0.0, 1.0));
  EXPECT_FALSE(power_law_sum({LinearPositive{1.0}}, -1.0, 1.0));
  r = power_law_sum({LinearPositive{1.0}, PowerLaw{2.0, 1.0}}, 0.0, INFINITY);
  ASSERT_TRUE(r);
  EXPECT_DOUBLE_EQ(r->first, 3.0);
  r = power_law_sum({ZeroDrift{}}, 0.0, 1.0);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->first, 0.0);
}
