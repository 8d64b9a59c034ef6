#pragma once

// Weighted orthant-union integral
//
//   I(P) = \int_{R^n} e^{w_1 + ... + w_n} 1{ exists k : w < p_k componentwise } dw
//
// over a finite apex set P. Translation covariance I(P + v) = e^{sum v} I(P)
// is used to work with apexes shifted so that every coordinate is <= 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "vecext/errors.hpp"

namespace vecext {

// Apexes stored row-major: point k occupies [k*dim, (k+1)*dim).
class ApexSet {
 public:
  ApexSet() = default;
  explicit ApexSet(std::size_t dim) : dim_(dim) {}
  ApexSet(std::size_t dim, std::vector<double> coords) : dim_(dim), data_(std::move(coords)) {
    if (dim_ == 0 || data_.size() % dim_ != 0) {
      throw DimensionError("ApexSet: coordinate count is not a multiple of the dimension");
    }
  }
  ApexSet(std::initializer_list<std::initializer_list<double>> points) {
    for (const auto& p : points) {
      if (dim_ == 0) dim_ = p.size();
      if (p.size() != dim_) throw DimensionError("ApexSet: ragged point list");
      data_.insert(data_.end(), p.begin(), p.end());
    }
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const { return size() == 0; }

  std::span<const double> operator[](std::size_t k) const {
    return {data_.data() + k * dim_, dim_};
  }

  void push_back(std::span<const double> p) {
    if (dim_ == 0) dim_ = p.size();
    if (p.size() != dim_) throw DimensionError("ApexSet: point has wrong dimension");
    data_.insert(data_.end(), p.begin(), p.end());
  }

  void clear() { data_.clear(); }
  void reserve(std::size_t points) { data_.reserve(points * dim_); }
  const std::vector<double>& raw() const { return data_; }

  friend bool operator==(const ApexSet&, const ApexSet&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

namespace detail {

inline bool weakly_dominates(std::span<const double> q, std::span<const double> p) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] < p[i]) return false;
  }
  return true;
}

// 2-D staircase integral of \int e^{x+y} over the union of lower-left
// quadrants, for a frontier sorted by x ascending (so y descending).
inline double staircase_integral(std::span<const std::pair<double, double>> frontier) {
  double total = 0.0;
  double prev = 0.0;  // e^{x_{j-1}}, with x_0 = -inf
  for (const auto& [x, y] : frontier) {
    const double ex = std::exp(x);
    total += std::exp(y) * (ex - prev);
    prev = ex;
  }
  return total;
}

// Incrementally maintained 2-D staircase with its weighted area.
class Staircase {
 public:
  // Inserts quadrant (-inf,x) x (-inf,y).
  void insert(double x, double y) {
    // Dominated if some point has x' >= x and y' >= y; the best candidate is
    // the first point with x' >= x (largest y among those).
    auto it = points_.lower_bound(x);
    if (it != points_.end() && it->second >= y) return;
    // Remove points with x' <= x and y' <= y; they sit immediately left of x.
    auto first = it;
    if (it != points_.end() && it->first == x) {
      first = it;
      ++it;
    }
    auto left = first;
    while (left != points_.begin()) {
      auto prev = std::prev(left);
      if (prev->second <= y) {
        left = prev;
      } else {
        break;
      }
    }
    // Affected terms: removed points [left, it) and the successor `it`,
    // whose term depends on its predecessor's x.
    const double before_x = left == points_.begin() ? -std::numeric_limits<double>::infinity()
                                                    : std::prev(left)->first;
    double removed = 0.0;
    double prev_x = before_x;
    for (auto r = left; r != it; ++r) {
      removed += term(r->first, r->second, prev_x);
      prev_x = r->first;
    }
    if (it != points_.end()) removed += term(it->first, it->second, prev_x);
    points_.erase(left, it);
    points_.emplace(x, y);
    double added = term(x, y, before_x);
    if (it != points_.end()) added += term(it->first, it->second, x);
    area_ += added - removed;
  }

  double area() const { return area_; }

  double recompute() const {
    double total = 0.0;
    double prev_x = -std::numeric_limits<double>::infinity();
    for (const auto& [x, y] : points_) {
      total += term(x, y, prev_x);
      prev_x = x;
    }
    return total;
  }

 private:
  static double term(double x, double y, double prev_x) {
    return std::exp(y) * (std::exp(x) - std::exp(prev_x));
  }

  std::map<double, double> points_;
  double area_ = 0.0;
};

inline double orthant_integral_1d(const ApexSet& apexes) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < apexes.size(); ++k) top = std::max(top, apexes[k][0]);
  return std::exp(top);
}

inline double orthant_integral_2d_shifted(const ApexSet& apexes) {
  std::vector<std::pair<double, double>> pts(apexes.size());
  for (std::size_t k = 0; k < apexes.size(); ++k) pts[k] = {apexes[k][0], apexes[k][1]};
  // Sort by x descending (ties: y descending) and keep strictly increasing y.
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second > b.second;
  });
  std::vector<std::pair<double, double>> frontier;
  double best_y = -std::numeric_limits<double>::infinity();
  for (const auto& p : pts) {
    if (p.second > best_y) {
      frontier.push_back(p);
      best_y = p.second;
    }
  }
  std::reverse(frontier.begin(), frontier.end());
  return staircase_integral(frontier);
}

inline double orthant_integral_3d_shifted(const ApexSet& apexes) {
  std::vector<std::size_t> order(apexes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return apexes[a][2] > apexes[b][2]; });
  Staircase stairs;
  double total = 0.0;
  for (std::size_t idx = 0; idx < order.size(); ++idx) {
    const auto p = apexes[order[idx]];
    stairs.insert(p[0], p[1]);
    const double z_hi = p[2];
    // Skip ahead while the next apex shares this z level.
    if (idx + 1 < order.size() && apexes[order[idx + 1]][2] == z_hi) continue;
    const double z_lo = idx + 1 < order.size() ? apexes[order[idx + 1]][2]
                                               : -std::numeric_limits<double>::infinity();
    total += stairs.area() * (std::exp(z_hi) - std::exp(z_lo));
  }
  return total;
}

}  // namespace detail

// Removes every apex weakly dominated by another; among exact duplicates the
// first occurrence is kept. Survivors keep their input order.
inline ApexSet pareto_prune(const ApexSet& apexes) {
  const std::size_t m = apexes.size();
  const std::size_t n = apexes.dim();
  ApexSet out(n);
  if (m == 0) return out;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> sums(m);
  for (std::size_t k = 0; k < m; ++k) {
    const auto p = apexes[k];
    sums[k] = std::accumulate(p.begin(), p.end(), 0.0);
  }
  // A weak dominator has a sum at least as large; ties resolved by index so
  // the first duplicate is processed (and kept) first.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sums[a] > sums[b]; });
  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    const auto p = apexes[idx];
    bool dominated = false;
    for (std::size_t j : kept) {
      if (detail::weakly_dominates(apexes[j], p)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) kept.push_back(idx);
  }
  // Points with equal sums may be processed after a dominator with an equal
  // sum only if they are duplicates, which the index order handles.
  std::sort(kept.begin(), kept.end());
  out.reserve(kept.size());
  for (std::size_t idx : kept) out.push_back(apexes[idx]);
  return out;
}

// Size cap on the Pareto frontier for n >= 4 inclusion-exclusion.
inline constexpr std::size_t kInclusionExclusionCap = 20;

namespace detail {

inline double inclusion_exclusion_shifted(const ApexSet& frontier) {
  const std::size_t m = frontier.size();
  const std::size_t n = frontier.dim();
  double total = 0.0;
  std::vector<double> mins((m + 1) * n);
  // Depth-first enumeration of nonempty subsets with running minima.
  auto recurse = [&](auto&& self, std::size_t start, std::size_t depth) -> void {
    for (std::size_t k = start; k < m; ++k) {
      const auto p = frontier[k];
      double* cur = &mins[(depth + 1) * n];
      const double* parent = &mins[depth * n];
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cur[i] = depth == 0 ? p[i] : std::min(parent[i], p[i]);
        s += cur[i];
      }
      const double term = std::exp(s);
      total += (depth % 2 == 0) ? term : -term;
      self(self, k + 1, depth + 1);
    }
  };
  recurse(recurse, 0, 0);
  return total;
}

}  // namespace detail

// Exact I(P). n = 1: exp(max). n = 2: staircase sweep. n = 3: z-sweep over an
// incrementally maintained staircase. n >= 4: inclusion-exclusion over the
// Pareto frontier, which must have at most kInclusionExclusionCap points.
inline double orthant_integral(const ApexSet& apexes) {
  const std::size_t n = apexes.dim();
  const std::size_t m = apexes.size();
  if (n == 0 || m == 0) throw DimensionError("orthant_integral: empty apex set");
  if (n == 1) return detail::orthant_integral_1d(apexes);

  std::vector<double> shift(n, -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < n; ++i) shift[i] = std::max(shift[i], apexes[k][i]);
  }
  std::vector<double> shifted(apexes.raw());
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < n; ++i) shifted[k * n + i] -= shift[i];
  }
  const ApexSet local(n, std::move(shifted));
  const double scale = std::exp(std::accumulate(shift.begin(), shift.end(), 0.0));

  if (n == 2) return scale * detail::orthant_integral_2d_shifted(local);
  if (n == 3) return scale * detail::orthant_integral_3d_shifted(local);

  const ApexSet frontier = pareto_prune(local);
  if (frontier.size() > kInclusionExclusionCap) {
    throw DimensionError("orthant_integral: Pareto frontier of " +
                         std::to_string(frontier.size()) + " points exceeds the cap of " +
                         std::to_string(kInclusionExclusionCap) + " in dimension " +
                         std::to_string(n));
  }
  return scale * detail::inclusion_exclusion_shifted(frontier);
}

}  // namespace vecext
