#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "vecext/constants.hpp"

using namespace vecext;

namespace {

EstimatorOptions quick(std::uint64_t reps = 20000, std::uint64_t seed = 5) {
  EstimatorOptions o;
  o.replicates = reps;
  o.batches = 20;
  o.rng = RngPolicy{seed, 0};
  return o;
}

}  // namespace

TEST(Constants, AllAZeroIsExactlyOne) {
  const PiterbargProblem p{{1.0}, {0.0, 0.0}, {}};
  const auto e = piterbarg_estimate(p, -3.0, 5.0, quick());
  EXPECT_EQ(e.method, "exact");
  EXPECT_EQ(e.value, 1.0);
}

TEST(Constants, DegenerateIntervalWithoutDriftIsOne) {
  const PiterbargProblem p{{1.5}, {1.0, 2.0}, {}};
  EXPECT_EQ(piterbarg_estimate(p, 0.7, 0.7, quick()).value, 1.0);
}

// E exp(sqrt(2a) B(S) - a|S|^alpha) = 1, so one point gives exp(-sum f_i(S)).
TEST(Constants, SinglePointIdentity) {
  const PiterbargProblem p{{0.8, 1.4}, {0.7, 0.3}, {PowerLaw{0.5, 1.0}, LinearPositive{0.25}}};
  const double s = 0.9;
  const auto e = piterbarg_estimate(p, s, s, quick(40000));
  const double want = std::exp(-(0.5 * s + 0.25 * s));
  EXPECT_LT(std::fabs(e.value - want), 4.0 * e.std_error) << e.value << " vs " << want;
}

// alpha = 2 has B(t) = t N, so sup over [0,T] is explicit:
// E sup exp(sqrt2 N t - t^2) = 1 + T/sqrt(pi).
TEST(Constants, SmoothCaseClosedForm) {
  const PiterbargProblem p{{2.0}, {1.0}, {}};
  const double T = 2.0;
  const auto e = piterbarg_estimate(p, 0.0, T, quick(40000));
  const double want = 1.0 + T / std::sqrt(std::numbers::pi);
  EXPECT_LT(std::fabs(e.value - want), 4.0 * e.std_error + 2e-3) << e.value;
}

TEST(Constants, Determinism) {
  const PiterbargProblem p{{1.0}, {1.0}, {PowerLaw{1.0, 1.0}}};
  auto o = quick(4000);
  const auto a = piterbarg_estimate(p, -1.0, 1.0, o);
  o.threads = 3;
  const auto b = piterbarg_estimate(p, -1.0, 1.0, o);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
  o.rng = RngPolicy{6, 0};
  EXPECT_NE(piterbarg_estimate(p, -1.0, 1.0, o).value, a.value);
}

TEST(Constants, NestedIsMonotone) {
  const PiterbargProblem p{{1.0}, {1.0}, {PowerLaw{0.5, 1.0}}};
  const auto v = piterbarg_nested(p, -2.0, 2.0, {{0.0, 0.0}, {0.0, 1.0}, {-1.0, 1.0}, {-2.0, 2.0}}, quick(5000));
  ASSERT_EQ(v.size(), 4u);
  for (std::size_t k = 1; k < v.size(); ++k) EXPECT_GE(v[k].value, v[k - 1].value);
}

// f(t) = 3t, alpha = a = 1: sup of sqrt2 B(t) - 4t is Exp(4), so E e^M = 4/3.
TEST(Constants, HalfLineLinearDrift) {
  const PiterbargProblem p{{1.0}, {1.0}, {LinearPositive{3.0}}};
  LimitOptions lo;
  lo.estimator = quick(20000);
  lo.initial_horizon = 2.0;
  const auto e = piterbarg_limit(p, LimitSide::half_line, lo);
  EXPECT_TRUE(std::isinf(e.s2));
  EXPECT_TRUE(e.coercive);
  EXPECT_GE(e.ladder.size(), 2u);
  // lattice maxima sit slightly below the continuous supremum
  EXPECT_NEAR(e.value, 4.0 / 3.0, 0.06);
}

TEST(Constants, ZeroDriftLimitDoesNotConverge) {
  const PiterbargProblem p{{1.0}, {1.0}, {}};
  LimitOptions lo;
  lo.estimator = quick(2000);
  lo.estimator.delta = 1.0 / 16;
  lo.initial_horizon = 1.0;
  lo.max_rungs = 3;
  try {
    piterbarg_limit(p, LimitSide::half_line, lo);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& err) {
    EXPECT_EQ(err.ladder().size(), 3u);
    EXPECT_FALSE(err.partial().coercive);
    const auto j = to_json(err.partial());
    EXPECT_EQ(j["S2"], "inf");
    EXPECT_EQ(j["ladder"].size(), 3u);
  }
}

TEST(Constants, FiniteIntervalThroughLimitEntry) {
  const PiterbargProblem p{{1.0}, {1.0}, {PowerLaw{1.0, 1.0}}};
  LimitOptions lo;
  lo.estimator = quick(3000);
  const auto a = piterbarg_interval(p, -0.5, 0.5, lo);
  const auto b = piterbarg_estimate(p, -0.5, 0.5, lo.estimator);
  EXPECT_EQ(a.value, b.value);
  EXPECT_TRUE(a.ladder.empty());
}

TEST(Constants, Validation) {
  const PiterbargProblem ok{{1.0}, {1.0}, {}};
  EXPECT_THROW(piterbarg_estimate(ok, 1.0, 0.0), DomainError);
  EXPECT_THROW(piterbarg_estimate(ok, 0.0, INFINITY), DomainError);
  EXPECT_THROW(piterbarg_interval(ok, INFINITY, INFINITY), DomainError);
  EXPECT_THROW(piterbarg_estimate(PiterbargProblem{{2.5}, {1.0}, {}}, 0.0, 1.0), DomainError);
  EXPECT_THROW(piterbarg_estimate(PiterbargProblem{{1.0}, {-1.0}, {}}, 0.0, 1.0), DomainError);
  EXPECT_THROW(piterbarg_estimate(PiterbargProblem{{1.0, 1.0, 1.0}, {1.0, 1.0}, {}}, 0.0, 1.0), DomainError);
  EXPECT_THROW(piterbarg_estimate(PiterbargProblem{{1.0}, {1.0, 1.0}, {ZeroDrift{}}}, 0.0, 1.0), DomainError);
  EXPECT_THROW(piterbarg_estimate(PiterbargProblem{{1.0}, {}, {}}, 0.0, 1.0), DomainError);
  EXPECT_THROW(pickands_estimate({1.0}, {0.0}), DomainError);
}

TEST(Constants, PickandsClosedForms) {
  EXPECT_EQ(*pickands_closed_form({1.0}, {2.5}), 2.5);
  EXPECT_NEAR(*pickands_closed_form({2.0}, {4.0}), 2.0 / std::sqrt(std::numbers::pi), 1e-15);
  EXPECT_NEAR(*pickands_closed_form({1.5, 2.0}, {0.0, 1.0}), 1.0 / std::sqrt(std::numbers::pi), 1e-15);
  EXPECT_FALSE(pickands_closed_form({1.5}, {1.0}));
  EXPECT_FALSE(pickands_closed_form({1.0}, {1.0, 1.0}));
}

// Smooth case: lattice effects are negligible and H_2 = 1/sqrt(pi).
TEST(Constants, PickandsSmoothCase) {
  PickandsOptions po;
  po.estimator = quick(4000);
  po.horizons = {4.0, 8.0, 16.0};
  po.rel_tol = 0.2;  // the 1/T offset alone is 10% at T = 16
  const auto e = pickands_estimate({2.0}, {1.0}, po);
  EXPECT_EQ(e.kind, "pickands");
  EXPECT_EQ(e.ladder.size(), 3u);
  ASSERT_TRUE(e.slope);
  // P[0,T]/T = 1/T + H_2, so the top rung carries a 1/16 offset
  EXPECT_NEAR(e.value, 1.0 / 16 + 1.0 / std::sqrt(std::numbers::pi), 4.0 * e.std_error + 5e-3);
  EXPECT_NEAR(*e.slope, 1.0 / std::sqrt(std::numbers::pi), 0.05);
}
