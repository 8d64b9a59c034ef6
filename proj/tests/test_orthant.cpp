#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "vecext/errors.hpp"
#include "vecext/orthant.hpp"

using namespace vecext;

namespace {

// Independent oracle: inclusion-exclusion over every nonempty subset.
double brute(const ApexSet& p) {
  const std::size_t m = p.size(), n = p.dim();
  double total = 0.0;
  for (unsigned mask = 1; mask < (1u << m); ++mask) {
    std::vector<double> low(n, INFINITY);
    int bits = 0;
    for (std::size_t k = 0; k < m; ++k) {
      if (!(mask >> k & 1u)) continue;
      ++bits;
      for (std::size_t i = 0; i < n; ++i) low[i] = std::min(low[i], p[k][i]);
    }
    double s = 0.0;
    for (double v : low) s += v;
    total += (bits % 2 ? 1.0 : -1.0) * std::exp(s);
  }
  return total;
}

ApexSet random_set(std::mt19937_64& g, std::size_t n, std::size_t m, double spread = 2.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  ApexSet s(n);
  std::vector<double> pt(n);
  for (std::size_t k = 0; k < m; ++k) {
    for (auto& v : pt) v = u(g);
    s.push_back(pt);
  }
  return s;
}

}  // namespace

TEST(Orthant, TwoPointClosedForm) {
  const double got = orthant_integral(ApexSet{{1.0, 0.0}, {0.0, 1.0}});
  EXPECT_NEAR(got, 2.0 * std::numbers::e - 1.0, 1e-12 * got);
}

TEST(Orthant, OneDimensionIsExpOfMax) {
  EXPECT_NEAR(orthant_integral(ApexSet{{-1.0}, {0.7}, {0.2}}), std::exp(0.7), 1e-15);
}

TEST(Orthant, SinglePointIsExpOfSum) {
  EXPECT_NEAR(orthant_integral(ApexSet{{0.3, -0.2, 0.5, 0.1}}), std::exp(0.7), 1e-14);
}

// Independent check of the 2-D sweep: along w2 the union is a step function
// in w1, so integrate e^{w1 + w2} piece by piece between apex heights.
TEST(Orthant, TwoDimensionAgainstSlabIntegration) {
  const ApexSet p{{0.5, -0.3}, {-0.4, 0.8}, {0.1, 0.2}};
  std::vector<double> cuts;
  for (std::size_t k = 0; k < p.size(); ++k) cuts.push_back(p[k][1]);
  std::sort(cuts.begin(), cuts.end());
  double acc = 0.0, below = -INFINITY;
  for (double top : cuts) {
    double reach = -INFINITY;  // widest apex still covering heights in (below, top)
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k][1] >= top) reach = std::max(reach, p[k][0]);
    }
    acc += std::exp(reach) * (std::exp(top) - std::exp(below));
    below = top;
  }
  EXPECT_NEAR(orthant_integral(p), acc, 1e-14 * acc);
}

TEST(Orthant, MatchesBruteForceAcrossDimensions) {
  std::mt19937_64 g(7);
  for (std::size_t n = 1; n <= 5; ++n) {
    for (int c = 0; c < 40; ++c) {
      const std::size_t m = 1 + g() % 11;
      const auto s = random_set(g, n, m);
      const double want = brute(s);
      EXPECT_NEAR(orthant_integral(s), want, 1e-11 * want) << "n=" << n << " m=" << m;
    }
  }
}

TEST(Orthant, TranslationCovariance) {
  std::mt19937_64 g(11);
  const auto s = random_set(g, 3, 9);
  const std::vector<double> v{0.4, -1.1, 2.0};
  ApexSet t(3);
  for (std::size_t k = 0; k < s.size(); ++k) {
    std::vector<double> pt{s[k][0] + v[0], s[k][1] + v[1], s[k][2] + v[2]};
    t.push_back(pt);
  }
  EXPECT_NEAR(orthant_integral(t), std::exp(1.3) * orthant_integral(s), 1e-12 * orthant_integral(t));
}

TEST(Orthant, LargeCoordinatesDoNotOverflowInShiftedForm) {
  // Values around e^600 would overflow naive subset sums of size 2.
  const ApexSet p{{300.0, 299.0}, {299.0, 300.0}};
  const double ratio = orthant_integral(p) / std::exp(599.0);
  EXPECT_NEAR(ratio, 2.0 - std::exp(-1.0), 1e-12);
}

TEST(Orthant, PruningRemovesDominatedAndDuplicates) {
  const ApexSet p{{0.0, 0.0}, {1.0, 1.0}, {1.0, 1.0}, {2.0, -1.0}, {0.5, 1.0}};
  const auto f = pareto_prune(p);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[0][0], 1.0);
  EXPECT_EQ(f[0][1], 1.0);
  EXPECT_EQ(f[1][0], 2.0);
  EXPECT_EQ(f[1][1], -1.0);
  EXPECT_NEAR(orthant_integral(f), orthant_integral(p), 1e-14);
}

TEST(Orthant, PruningIsIdempotentAndValuePreserving) {
  std::mt19937_64 g(3);
  for (int c = 0; c < 50; ++c) {
    const auto s = random_set(g, 2 + c % 3, 15);
    const auto f = pareto_prune(s);
    EXPECT_EQ(pareto_prune(f).size(), f.size());
    EXPECT_NEAR(orthant_integral(f), orthant_integral(s), 1e-12 * orthant_integral(s));
  }
}

TEST(Orthant, Errors) {
  EXPECT_THROW(orthant_integral(ApexSet(2)), DimensionError);
  EXPECT_THROW(ApexSet(2, std::vector<double>{1.0, 2.0, 3.0}), DimensionError);
  EXPECT_THROW((ApexSet{{1.0, 2.0}, {1.0}}), DimensionError);
  // A 4-D antichain larger than the cap
  ApexSet big(4);
  for (int k = 0; k < 25; ++k) {
    const double t = k / 24.0;
    std::vector<double> pt{t, 1.0 - t, std::sin(3.0 * t), -std::sin(3.0 * t)};
    big.push_back(pt);
  }
  ASSERT_GT(pareto_prune(big).size(), kInclusionExclusionCap);
  EXPECT_THROW(orthant_integral(big), DimensionError);
}

// Grid oracle over [-10, max]^n. The innermost coordinate is integrated
// exactly (e^{reach}), the others by the midpoint rule. Cells cut by an apex
// face carry an O(h) error, so a 1e-2 grid is only good to ~0.5%; 1e-3 is used.
TEST(Orthant, RiemannGridOracle) {
  std::mt19937_64 g(23);
  const double h = 1e-3, lo = -10.0;
  for (std::size_t n : {2u, 3u}) {
    for (int c = 0; c < (n == 2 ? 6 : 2); ++c) {
      const auto s = random_set(g, n, 1 + g() % (n == 2 ? 12 : 8));
      std::vector<double> hi(n, -INFINITY);
      for (std::size_t k = 0; k < s.size(); ++k) {
        for (std::size_t i = 0; i < n; ++i) hi[i] = std::max(hi[i], s[k][i]);
      }
      const long n1 = std::lround(std::ceil((hi[1] - lo) / h));
      const long n2 = n == 3 ? std::lround(std::ceil((hi[2] - lo) / h)) : 1;
      double acc = 0.0;
      for (long a = 0; a < n1; ++a) {
        const double w1 = lo + (a + 0.5) * h;
        for (long b = 0; b < n2; ++b) {
          const double w2 = n == 3 ? lo + (b + 0.5) * h : 0.0;
          double reach = -INFINITY;
          for (std::size_t k = 0; k < s.size(); ++k) {
            if (w1 < s[k][1] && (n == 2 || w2 < s[k][2])) reach = std::max(reach, s[k][0]);
          }
          if (reach > -INFINITY) acc += std::exp(reach + w1 + w2) * (n == 3 ? h * h : h);
        }
      }
      const double got = orthant_integral(s);
      EXPECT_NEAR(got, acc, 1e-3 * got) << "n=" << n;
    }
  }
}

TEST(Orthant, PruneMatchesQuadraticScan) {
  std::mt19937_64 g(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ApexSet s(2);
  for (int k = 0; k < 100; ++k) {
    const double pt[2] = {u(g), u(g)};
    s.push_back(pt);
  }
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < s.size(); ++k) {
    bool dominated = false;
    for (std::size_t j = 0; j < s.size() && !dominated; ++j) {
      dominated = j != k && s[j][0] >= s[k][0] && s[j][1] >= s[k][1];
    }
    if (!dominated) keep.push_back(k);
  }
  const auto f = pareto_prune(s);
  ASSERT_EQ(f.size(), keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    EXPECT_EQ(f[r][0], s[keep[r]][0]);
    EXPECT_EQ(f[r][1], s[keep[r]][1]);
  }
}

TEST(Orthant, AddingAnApexNeverDecreases) {
  std::mt19937_64 g(31);
  for (int c = 0; c < 30; ++c) {
    auto s = random_set(g, 3, 6);
    const double before = orthant_integral(s);
    const auto extra = random_set(g, 3, 1);
    s.push_back(extra[0]);
    EXPECT_GE(orthant_integral(s), before * (1.0 - 1e-14));
  }
}
