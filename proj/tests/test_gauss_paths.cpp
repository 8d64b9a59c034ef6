#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "vecext/gauss_paths.hpp"

using namespace vecext;

TEST(Covariance, FbmFormula) {
  // oracle values by hand
  EXPECT_DOUBLE_EQ(fbm_covariance(1.0, 1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(fbm_covariance(0.25, 1.0, 1.0), 0.25);  // Brownian: min(s,t)
  EXPECT_NEAR(fbm_covariance(0.5, 1.0, 2.0), 0.5, 1e-15);  // alpha=2: s t
  EXPECT_NEAR(fbm_covariance(1.0, 2.0, 0.5), 0.5 * (1.0 + std::sqrt(2.0) - 1.0), 1e-15);
  EXPECT_EQ(fbm_covariance(0.0, 0.7, 1.3), 0.0);
}

TEST(Grid, UniformGrid) {
  const auto t = uniform_grid(2.0, 4);
  ASSERT_EQ(t.size(), 5u);
  EXPECT_DOUBLE_EQ(t[0], 0.0);
  EXPECT_DOUBLE_EQ(t[1], 0.5);
  EXPECT_DOUBLE_EQ(t[4], 2.0);
}

TEST(Paths, DeterministicGivenSeed) {
  const auto a = sample_fbm(0.7, 1.0, 256, {9, 3});
  const auto b = sample_fbm(0.7, 1.0, 256, {9, 3});
  const auto c = sample_fbm(0.7, 1.0, 256, {9, 4});
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  EXPECT_EQ(a.values[0][0], 0.0);
}

// Covariance of a few entries over many replicates, per sampler method.
void check_covariance(double alpha, std::size_t m, int reps) {
  const CoordinateSampler sampler(FBm{alpha}, 1.0, m);
  std::vector<double> x(m + 1);
  const std::vector<std::pair<std::size_t, std::size_t>> pairs{{m, m}, {m / 2, m}, {1, m}, {m / 4, m / 2}, {1, 1}};
  std::vector<double> s(pairs.size()), q(pairs.size());
  for (int r = 0; r < reps; ++r) {
    RandomStream rng({77, static_cast<std::uint64_t>(r)});
    sampler.sample(rng, x);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const double p = x[pairs[k].first] * x[pairs[k].second];
      s[k] += p;
      q[k] += p * p;
    }
  }
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double mean = s[k] / reps;
    const double se = std::sqrt((q[k] / reps - mean * mean) / reps);
    const double want = fbm_covariance(static_cast<double>(pairs[k].first) / m,
                                       static_cast<double>(pairs[k].second) / m, alpha);
    EXPECT_NEAR(mean, want, 4.5 * se) << "alpha " << alpha << " pair " << k << " method " << to_string(sampler.method());
  }
}

TEST(Paths, CovarianceAcrossMethods) {
  check_covariance(0.3, 64, 40000);
  check_covariance(1.0, 64, 40000);
  check_covariance(1.7, 64, 40000);
  check_covariance(1.99, 64, 40000);
  check_covariance(2.0, 64, 20000);
}

TEST(Paths, MethodSelection) {
  EXPECT_EQ(CoordinateSampler(FBm{1.0}, 1.0, 8).method(), SamplerMethod::independent_increments);
  EXPECT_EQ(CoordinateSampler(FBm{2.0}, 1.0, 8).method(), SamplerMethod::linear);
  EXPECT_EQ(CoordinateSampler(FBm{0.5}, 1.0, 8).method(), SamplerMethod::circulant);
}

TEST(Paths, Alpha2IsLinear) {
  const auto p = sample_fbm(2.0, 1.0, 10, {1, 0});
  const double slope = p.values[0][10];
  for (std::size_t k = 0; k <= 10; ++k) EXPECT_NEAR(p.values[0][k], slope * k / 10.0, 1e-12);
}

TEST(Paths, StationaryHasUnitVariance) {
  const CoordinateSampler sampler(StationaryExp{2.0, 1.5}, 3.0, 32);
  std::vector<double> x(33);
  double s0 = 0, s32 = 0, c = 0;
  const int reps = 40000;
  for (int r = 0; r < reps; ++r) {
    RandomStream rng({5, static_cast<std::uint64_t>(r)});
    sampler.sample(rng, x);
    s0 += x[0] * x[0];
    s32 += x[32] * x[32];
    c += x[0] * x[4];
  }
  EXPECT_NEAR(s0 / reps, 1.0, 0.03);
  EXPECT_NEAR(s32 / reps, 1.0, 0.03);
  EXPECT_NEAR(c / reps, std::exp(-2.0 * std::pow(4 * 3.0 / 32, 1.5)), 0.03);
}

TEST(Paths, UserCovarianceUsesCholesky) {
  // Brownian bridge
  const CoordinateSampler sampler(UserCovariance{[](double s, double t) { return std::min(s, t) - s * t; }}, 1.0, 16);
  std::vector<double> x(17);
  RandomStream rng({1, 0});
  sampler.sample(rng, x);
  EXPECT_NEAR(x[0], 0.0, 1e-12);
  EXPECT_NEAR(x[16], 0.0, 1e-6);
}

TEST(Paths, VectorSamplerScalesAndTrends) {
  ProcessSpec spec;
  spec.horizon = 2.0;
  spec.coords.push_back({FBm{1.0}, [](double t) { return -t; }, 2.0});
  spec.coords.push_back({FBm{0.5}, nullptr, 1.0});
  const auto raw = sample_vector(spec, 8, {3, 0}, false);
  const auto with = sample_vector(spec, 8, {3, 0}, true);
  ASSERT_EQ(with.dim(), 2u);
  for (std::size_t k = 0; k <= 8; ++k) {
    EXPECT_NEAR(with.values[0][k], raw.values[0][k] - with.times[k], 1e-14);
    EXPECT_EQ(with.values[1][k], raw.values[1][k]);
  }
  // the first coordinate is B(t)/2
  const auto plain = sample_fbm(1.0, 2.0, 8, {3, 0});
  for (std::size_t k = 0; k <= 8; ++k) EXPECT_NEAR(raw.values[0][k], plain.values[0][k] / 2.0, 1e-14);
}

TEST(Paths, ValidationNamesCoordinate) {
  ProcessSpec spec;
  spec.coords.push_back({FBm{1.0}, nullptr, 1.0});
  spec.coords.push_back({FBm{2.5}, nullptr, 1.0});
  try {
    spec.validate();
    FAIL() << "expected a CoordinateError";
  } catch (const CoordinateError& e) {
    EXPECT_EQ(e.index(), 1u);
  }
  EXPECT_THROW(sample_fbm(0.0, 1.0, 8, {}), DomainError);
  EXPECT_THROW(sample_fbm(1.0, 1.0, 0, {}), DomainError);
  ProcessSpec empty;
  EXPECT_THROW(empty.validate(), DomainError);
}

TEST(Paths, CsvHasHeader) {
  const auto p = sample_fbm(1.0, 1.0, 2, {1, 0});
  std::ostringstream o;
  write_csv(o, p);
  EXPECT_EQ(o.str().substr(0, 5), "t,x1\n");
}

TEST(Circulant, LongGridsStayExact) {
  // variance at t = T for a large grid
  const CoordinateSampler sampler(FBm{1.5}, 1.0, 1 << 14);
  std::vector<double> x((1 << 14) + 1);
  double s = 0;
  const int reps = 4000;
  for (int r = 0; r < reps; ++r) {
    RandomStream rng({8, static_cast<std::uint64_t>(r)});
    sampler.sample(rng, x);
    s += x.back() * x.back();
  }
  EXPECT_NEAR(s / reps, 1.0, 4.0 * std::sqrt(2.0 / reps));
}
