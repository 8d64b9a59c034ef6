#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "vecext/parallel.hpp"
#include "vecext/rng.hpp"

using namespace vecext;

TEST(Rng, SameStreamSameNumbers) {
  RandomStream a({42, 7}), b({42, 7});
  for (int k = 0; k < 1000; ++k) ASSERT_EQ(a.normal(), b.normal());
}

TEST(Rng, StreamsAndSeedsDiffer) {
  RandomStream a({42, 7}), b({42, 8}), c({43, 7});
  int same_b = 0, same_c = 0;
  for (int k = 0; k < 100; ++k) {
    const double x = a.uniform();
    same_b += x == b.uniform();
    same_c += x == c.uniform();
  }
  EXPECT_EQ(same_b, 0);
  EXPECT_EQ(same_c, 0);
}

TEST(Rng, DeriveIsDeterministicAndDistinct) {
  const RngPolicy p{5, 0};
  EXPECT_EQ(p.derive(1), p.derive(1));
  EXPECT_NE(p.derive(1).master_seed, p.derive(2).master_seed);
  EXPECT_EQ(p.with_stream(9).stream_id, 9u);
}

TEST(Rng, UniformInOpenUnitInterval) {
  RandomStream r({1, 0});
  for (int k = 0; k < 100000; ++k) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

// Moments of the normal generator, including the ziggurat tail.
TEST(Rng, NormalMoments) {
  RandomStream r({2, 0});
  const int n = 1000000;
  double s1 = 0, s2 = 0, s4 = 0;
  int beyond3 = 0;
  for (int k = 0; k < n; ++k) {
    const double x = r.normal();
    s1 += x;
    s2 += x * x;
    s4 += x * x * x * x;
    beyond3 += std::fabs(x) > 3.0;
  }
  EXPECT_NEAR(s1 / n, 0.0, 5 * std::sqrt(1.0 / n));
  EXPECT_NEAR(s2 / n, 1.0, 5 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s4 / n, 3.0, 5 * std::sqrt(96.0 / n));
  // P(|Z| > 3) = 0.0026998
  const double p = 0.0026998;
  EXPECT_NEAR(static_cast<double>(beyond3) / n, p, 5 * std::sqrt(p / n));
}

TEST(Parallel, ThreadCountDoesNotChangeResults) {
  auto fn = [](std::uint64_t r) {
    RandomStream rng({11, r});
    return rng.normal() * rng.normal();
  };
  const auto one = run_batches_scalar(10007, fn, {37, 1});
  const auto four = run_batches_scalar(10007, fn, {37, 4});
  EXPECT_EQ(one.mean, four.mean);
  EXPECT_EQ(one.std_error, four.std_error);
  EXPECT_EQ(one.batch_means, four.batch_means);
}

TEST(Parallel, BatchMeansErrorMatchesNaive) {
  const auto s = run_batches_scalar(
      100000,
      [](std::uint64_t r) {
        RandomStream rng({3, r});
        return rng.normal();
      },
      {50, 2});
  EXPECT_NEAR(s.std_error, 1.0 / std::sqrt(1e5), 0.25 / std::sqrt(1e5));
}

TEST(Parallel, ExceptionsPropagate) {
  EXPECT_THROW(run_batches_scalar(
                   100, [](std::uint64_t r) -> double { if (r == 50) throw std::runtime_error("x"); return 0.0; },
                   {10, 2}),
               std::runtime_error);
  EXPECT_THROW(run_batches_scalar(0, [](std::uint64_t) { return 0.0; }), std::invalid_argument);
}
