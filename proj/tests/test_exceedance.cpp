#include <cmath>

#include <gtest/gtest.h>

#include "vecext/exceedance.hpp"
#include "vecext/special.hpp"

using namespace vecext;

namespace {

ExceedanceOptions opts(std::size_t m, std::uint64_t reps, std::uint64_t seed = 17) {
  ExceedanceOptions o;
  o.m = m;
  o.replicates = reps;
  o.batches = 20;
  o.rng = RngPolicy{seed, 0};
  return o;
}

GridPath toy() {
  GridPath p;
  p.times = {0.0, 0.5, 1.0};
  p.values = {{0.0, 2.0, 1.0}, {0.0, 1.5, 3.0}};
  return p;
}

}  // namespace

TEST(Exceedance, PathHelpers) {
  const auto p = toy();
  EXPECT_EQ(grid_max_min(p), 1.5);
  EXPECT_EQ(grid_max_min(p, 2), 1.0);
  EXPECT_EQ(first_crossing(p, 1.2), 1);
  EXPECT_EQ(first_crossing(p, 1.6), -1);
  EXPECT_DOUBLE_EQ(*scaled_ruin_time(p, 1.2, 2.0), 0.5 * 1.44);
  EXPECT_FALSE(scaled_ruin_time(p, 5.0, 2.0));
}

// On a one-step grid only t = 1 matters: the event is {B_i(1) > d_i u + c_i}.
TEST(Exceedance, OneStepGridMatchesNormalTails) {
  const RuinModel m{{1.0, 1.5}, {0.2, -0.1}, {1.0, 0.5}, 1.0};
  const double u = 0.8;
  const auto e = estimate_ruin(m, u, opts(1, 40000));
  const double want = tail_psi(0.8 + 0.2) * tail_psi(0.4 - 0.1);
  EXPECT_LT(std::fabs(e.probability - want), 4.0 * e.std_error) << e.probability << " vs " << want;
  EXPECT_EQ(e.grid, 1u);
  EXPECT_EQ(e.model["d"], (std::vector<double>{1.0, 0.5}));
}

// Brownian motion: P(sup_[0,1] B > u) = 2 Psi(u); a fine grid misses a little.
TEST(Exceedance, BrownianReflection) {
  const RuinModel m{{1.0}, {0.0}, {1.0}, 1.0};
  const auto e = estimate_ruin(m, 1.5, opts(4096, 20000));
  const double want = 2.0 * tail_psi(1.5);
  EXPECT_LT(e.probability, want + 4.0 * e.std_error);
  EXPECT_GT(e.probability, 0.95 * want - 4.0 * e.std_error);
}

TEST(Exceedance, CommonRandomNumbersAreMonotone) {
  const RuinModel m{{1.0, 1.0}, {0.0, 0.0}, {1.0, 1.0}, 1.0};
  const auto v = estimate_ruin(m, {0.5, 1.0, 1.5, 2.0}, opts(256, 5000));
  ASSERT_EQ(v.size(), 4u);
  for (std::size_t k = 1; k < v.size(); ++k) EXPECT_LE(v[k].hits, v[k - 1].hits);
}

TEST(Exceedance, ThreadCountDoesNotChangeResults) {
  const RuinModel m{{0.7, 1.3}, {0.1, 0.1}, {1.0, 1.0}, 1.0};
  auto o = opts(128, 3000);
  o.threads = 1;
  const auto a = estimate_ruin(m, 1.0, o);
  o.threads = 4;
  const auto b = estimate_ruin(m, 1.0, o);
  EXPECT_EQ(a.hits, b.hits);
  EXPECT_EQ(a.probability, b.probability);
}

TEST(Exceedance, RuinTimesMatchHits) {
  const RuinModel m{{1.0}, {0.0}, {1.0}, 1.0};
  const auto o = opts(256, 5000);
  const double u = 1.0;
  const auto s = sample_ruin_time(m, u, 2.0, o);
  const auto e = estimate_ruin(m, u, o);
  EXPECT_EQ(s.values.size(), e.hits);
  for (double v : s.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0 + 1e-12);
  }
  EXPECT_THROW(sample_ruin_time(m, u, 0.0, o), DomainError);
}

TEST(Exceedance, KsAndEmpiricalCdf) {
  std::vector<double> xs;
  const int n = 100;
  for (int k = 0; k < n; ++k) xs.push_back((k + 0.5) / n);
  EXPECT_NEAR(ks_distance(xs, [](double x) { return x; }), 0.5 / n, 1e-12);
  EXPECT_NEAR(empirical_cdf(xs, 0.25), 0.25, 1e-12);
  EXPECT_EQ(empirical_cdf(xs, -1.0), 0.0);
  EXPECT_THROW(ks_distance({}, [](double x) { return x; }), DomainError);
}

TEST(Exceedance, InputValidation) {
  const RuinModel m{{1.0}, {0.0}, {1.0}, 1.0};
  EXPECT_THROW(estimate_ruin(m, std::vector<double>{}, opts(8, 10)), DomainError);
  EXPECT_THROW(estimate_ruin(m, INFINITY, opts(8, 10)), DomainError);
  EXPECT_THROW(estimate_ruin(m, 1.0, opts(8, 0)), DomainError);
}

TEST(Exceedance, ComparisonRows) {
  const RuinModel m{{1.5}, {0.0}, {1.0}, 1.0};
  CallbackConstants none(nullptr, nullptr);
  const auto pred = prop1_ruin_asymptotic(m, none);
  ExceedanceEstimate e;
  e.u = 2.0;
  e.probability = 1.1 * tail_psi(2.0);
  e.std_error = 0.01 * e.probability;
  e.model = model_json(m);
  const auto row = compare_asymptotic(e, pred, 2.0);
  EXPECT_NEAR(row.ratio, 1.1, 1e-12);
  EXPECT_NEAR(row.ratio_std_error, 0.011, 1e-12);
  EXPECT_THROW(compare_asymptotic(e, pred, 2.5), MismatchError);
  e.model = model_json(RuinModel{{1.5}, {0.0}, {2.0}, 1.0});
  EXPECT_THROW(compare_asymptotic(e, pred, 2.0), MismatchError);
}

TEST(Exceedance, LadderApproachFlag) {
  const RuinModel m{{1.5}, {0.0}, {1.0}, 1.0};
  CallbackConstants none(nullptr, nullptr);
  const auto pred = prop1_ruin_asymptotic(m, none);
  auto make = [&](double u, double ratio) {
    ExceedanceEstimate e;
    e.u = u;
    e.probability = ratio * pred.value(u);
    e.std_error = 1e-4 * e.probability;
    return e;
  };
  EXPECT_TRUE(compare_ladder({make(1.0, 1.3), make(2.0, 1.1), make(3.0, 1.02)}, pred).approaching);
  const auto bad = compare_ladder({make(1.0, 1.05), make(2.0, 1.3)}, pred);
  EXPECT_FALSE(bad.approaching);
  EXPECT_EQ(to_json(bad)["rows"].size(), 2u);
}

TEST(Exceedance, VacuousThreshold) {
  const RuinModel m{{1.0, 0.5}, {0.0, 0.0}, {1.0, 1.0}, 1.0};
  const auto e = estimate_ruin(m, -10.0, opts(64, 2000));
  EXPECT_EQ(e.hits, 2000u);
  EXPECT_EQ(e.probability, 1.0);
}

// Ruin through the model and exceedance through the equivalent spec share
// every random number.
TEST(Exceedance, RuinEqualsEquivalentExceedance) {
  const RuinModel m{{0.8, 1.2}, {0.5, -0.3}, {1.0, 2.0}, 1.5};
  ProcessSpec spec;
  spec.horizon = 1.5;
  spec.coords.resize(2);
  spec.coords[0].covariance = FBm{0.8};
  spec.coords[0].scale = 1.0;
  spec.coords[0].trend = [](double t) { return -0.5 * t; };
  spec.coords[1].covariance = FBm{1.2};
  spec.coords[1].scale = 2.0;
  spec.coords[1].trend = [](double t) { return 0.15 * t; };
  const auto o = opts(128, 3000);
  const ExceedanceEngine a(ruin_process_spec(m), o.m), b(spec, o.m);
  for (std::uint64_t r = 0; r < 3000; ++r) {
    ASSERT_EQ(a.first_crossing(r, o.rng, 0.7), b.first_crossing(r, o.rng, 0.7)) << r;
  }
}

TEST(Exceedance, SimultaneityAndPremiumShrinkTheEvent) {
  const auto o = opts(256, 5000);
  const auto one = estimate_ruin(RuinModel{{1.0}, {0.0}, {1.0}, 1.0}, 1.0, o);
  const auto two = estimate_ruin(RuinModel{{1.0, 1.0}, {0.0, 0.0}, {1.0, 1.0}, 1.0}, 1.0, o);
  EXPECT_LE(two.hits, one.hits);
  const auto rich = estimate_ruin(RuinModel{{1.0}, {2.0}, {1.0}, 1.0}, 1.0, o);
  EXPECT_LT(rich.hits, one.hits);
}
