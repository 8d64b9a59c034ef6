#pragma once

// Direct Monte Carlo of P{exists t in [0,T]: X(t) + h(t) > u 1} on a grid,
// simultaneous ruin probabilities and conditional ruin times.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vecext/asymptotics.hpp"
#include "vecext/gauss_paths.hpp"
#include "vecext/parallel.hpp"
#include "vecext/rng.hpp"

namespace vecext {

struct ExceedanceOptions {
  std::size_t m = std::size_t{1} << 14;
  std::uint64_t replicates = 1000000;
  std::size_t batches = 50;
  unsigned threads = 0;
  RngPolicy rng{};
};

struct ExceedanceEstimate {
  double probability = 0.0;
  double std_error = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t replicates = 0;
  std::size_t grid = 0;
  double u = 0.0;
  nlohmann::json model;  // echo of the ruin model, when estimated from one
};

inline nlohmann::json to_json(const ExceedanceEstimate& e) {
  return {{"u", e.u},       {"probability", e.probability}, {"std_error", e.std_error},
          {"hits", e.hits}, {"replicates", e.replicates},   {"grid", e.grid},
          {"model", e.model}};
}

// max_k min_i values[i][k] over grid indices 0, stride, 2 stride, ...
inline double grid_max_min(const GridPath& path, std::size_t stride = 1) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < path.times.size(); k += stride) {
    double low = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < path.dim(); ++i) low = std::min(low, path.values[i][k]);
    best = std::max(best, low);
  }
  return best;
}

// First grid index with min_i values[i][k] > u, or -1.
inline long first_crossing(const GridPath& path, double u) {
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    bool all = true;
    for (std::size_t i = 0; i < path.dim() && all; ++i) all = path.values[i][k] > u;
    if (all) return static_cast<long>(k);
  }
  return -1;
}

// (T - tau) u^s for a path that crosses, nullopt otherwise.
inline std::optional<double> scaled_ruin_time(const GridPath& path, double u, double scaling) {
  const long k = first_crossing(path, u);
  if (k < 0) return std::nullopt;
  return (path.times.back() - path.times[static_cast<std::size_t>(k)]) * std::pow(u, scaling);
}

// Replicate-level engine shared by all estimators. Per replicate, coordinate
// paths (scaled, with trend) are drawn in order from the replicate's stream;
// drawing stops early once the event {max_k min_i > floor} is impossible.
class ExceedanceEngine {
 public:
  ExceedanceEngine(const ProcessSpec& spec, std::size_t m) : sampler_(spec, m) {}

  const VectorSampler& sampler() const { return sampler_; }

  // Returns max_k min_i of the replicate's path, or -inf if it is known to be
  // <= floor.
  double max_min(std::uint64_t replicate, RngPolicy policy, double floor) const {
    RandomStream rng(policy.with_stream(replicate));
    const std::size_t n = sampler_.dim();
    const std::size_t len = sampler_.steps() + 1;
    thread_local std::vector<double> low;
    thread_local std::vector<double> buf;
    low.assign(len, std::numeric_limits<double>::infinity());
    buf.resize(len);
    for (std::size_t i = 0; i < n; ++i) {
      sampler_.sample_coordinate(i, rng, buf, true);
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < len; ++k) {
        low[k] = std::min(low[k], buf[k]);
        top = std::max(top, low[k]);
      }
      if (top <= floor) return -std::numeric_limits<double>::infinity();
    }
    return *std::max_element(low.begin(), low.end());
  }

  // Index of the first k with min_i > u, or -1.
  long first_crossing(std::uint64_t replicate, RngPolicy policy, double u) const {
    RandomStream rng(policy.with_stream(replicate));
    const std::size_t n = sampler_.dim();
    const std::size_t len = sampler_.steps() + 1;
    thread_local std::vector<double> low;
    thread_local std::vector<double> buf;
    low.assign(len, std::numeric_limits<double>::infinity());
    buf.resize(len);
    for (std::size_t i = 0; i < n; ++i) {
      sampler_.sample_coordinate(i, rng, buf, true);
      bool any = false;
      for (std::size_t k = 0; k < len; ++k) {
        low[k] = std::min(low[k], buf[k]);
        any = any || low[k] > u;
      }
      if (!any) return -1;
    }
    for (std::size_t k = 0; k < len; ++k) {
      if (low[k] > u) return static_cast<long>(k);
    }
    return -1;
  }

 private:
  VectorSampler sampler_;
};

namespace detail {

inline ExceedanceEstimate make_estimate(const BatchStats& s, std::size_t m, double u) {
  ExceedanceEstimate e;
  e.probability = s.mean;
  e.replicates = s.replicates;
  e.hits = static_cast<std::uint64_t>(std::llround(s.mean * static_cast<double>(s.replicates)));
  e.std_error = std::sqrt(e.probability * (1.0 - e.probability) / static_cast<double>(s.replicates));
  e.grid = m;
  e.u = u;
  return e;
}

}  // namespace detail

// One simulation serves every threshold in `us` (common random numbers).
inline std::vector<ExceedanceEstimate> estimate_exceedance(const ProcessSpec& spec,
                                                           const std::vector<double>& us,
                                                           ExceedanceOptions opt = {}) {
  if (us.empty()) throw DomainError("estimate_exceedance: no thresholds");
  for (double u : us) {
    if (!std::isfinite(u)) throw DomainError("estimate_exceedance: u must be finite");
  }
  if (opt.replicates == 0) throw DomainError("estimate_exceedance: R >= 1");
  const ExceedanceEngine engine(spec, opt.m);
  const double floor = *std::min_element(us.begin(), us.end());
  const auto stats = run_batches(
      opt.replicates, us.size(),
      [&](std::uint64_t r, std::span<double> out) {
        const double mm = engine.max_min(r, opt.rng, floor);
        for (std::size_t j = 0; j < us.size(); ++j) out[j] = mm > us[j] ? 1.0 : 0.0;
      },
      BatchOptions{opt.batches, opt.threads});
  std::vector<ExceedanceEstimate> out;
  for (std::size_t j = 0; j < us.size(); ++j) out.push_back(detail::make_estimate(stats[j], opt.m, us[j]));
  return out;
}

inline ExceedanceEstimate estimate_exceedance(const ProcessSpec& spec, double u,
                                              ExceedanceOptions opt = {}) {
  return estimate_exceedance(spec, std::vector<double>{u}, opt)[0];
}

// Ruin of U_i = u d_i + c_i t - B_{alpha_i}(t) as exceedance of
// B_{alpha_i}(t)/d_i - c_i t / d_i over u.
inline ProcessSpec ruin_process_spec(const RuinModel& model) {
  model.validate();
  ProcessSpec spec;
  spec.horizon = model.horizon;
  for (std::size_t i = 0; i < model.dim(); ++i) {
    CoordSpec c;
    c.covariance = FBm{model.alpha[i]};
    c.scale = model.d[i];
    const double slope = -model.c[i] / model.d[i];
    if (slope != 0.0) c.trend = [slope](double t) { return slope * t; };
    spec.coords.push_back(std::move(c));
  }
  return spec;
}

inline nlohmann::json model_json(const RuinModel& m) {
  return {{"alpha", m.alpha}, {"c", m.c}, {"d", m.d}, {"T", m.horizon}};
}

inline std::vector<ExceedanceEstimate> estimate_ruin(const RuinModel& model,
                                                     const std::vector<double>& us,
                                                     ExceedanceOptions opt = {}) {
  auto out = estimate_exceedance(ruin_process_spec(model), us, opt);
  for (auto& e : out) e.model = model_json(model);
  return out;
}

inline ExceedanceEstimate estimate_ruin(const RuinModel& model, double u, ExceedanceOptions opt = {}) {
  return estimate_ruin(model, std::vector<double>{u}, opt)[0];
}

struct RuinTimeSample {
  std::vector<double> values;  // (T - tau_u) u^scaling, hitting replicates only, replicate order
  double scaling = 0.0;
  double u = 0.0;
  std::uint64_t replicates = 0;
  std::size_t grid = 0;
  bool empty() const { return values.empty(); }
};

inline RuinTimeSample sample_ruin_time(const ProcessSpec& spec, double u, double scaling,
                                       ExceedanceOptions opt = {}) {
  if (!(scaling > 0.0)) throw DomainError("sample_ruin_time: scaling exponent must be positive");
  if (!std::isfinite(u)) throw DomainError("sample_ruin_time: u must be finite");
  const ExceedanceEngine engine(spec, opt.m);
  const auto times = uniform_grid(spec.horizon, opt.m);
  const double factor = std::pow(u, scaling);
  // Each replicate writes its own slot, then hits are collected in order.
  std::vector<double> slot(opt.replicates, -1.0);
  run_batches(
      opt.replicates, 1,
      [&](std::uint64_t r, std::span<double> out) {
        const long k = engine.first_crossing(r, opt.rng, u);
        if (k >= 0) {
          slot[r] = (spec.horizon - times[static_cast<std::size_t>(k)]) * factor;
          out[0] = 1.0;
        }
      },
      BatchOptions{opt.batches, opt.threads});
  RuinTimeSample s;
  s.scaling = scaling;
  s.u = u;
  s.replicates = opt.replicates;
  s.grid = opt.m;
  for (double v : slot) {
    if (v >= 0.0) s.values.push_back(v);
  }
  return s;
}

inline RuinTimeSample sample_ruin_time(const RuinModel& model, double u, double scaling,
                                       ExceedanceOptions opt = {}) {
  return sample_ruin_time(ruin_process_spec(model), u, scaling, opt);
}

// Empirical CDF at x.
inline double empirical_cdf(std::vector<double> sorted_values, double x) {
  const auto it = std::upper_bound(sorted_values.begin(), sorted_values.end(), x);
  return static_cast<double>(it - sorted_values.begin()) / static_cast<double>(sorted_values.size());
}

// sup_x |F_n(x) - F(x)| for a continuous F.
inline double ks_distance(std::vector<double> values, const std::function<double(double)>& cdf) {
  if (values.empty()) throw DomainError("ks_distance: empty sample");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double f = cdf(values[k]);
    d = std::max({d, std::fabs(static_cast<double>(k + 1) / n - f), std::fabs(f - static_cast<double>(k) / n)});
  }
  return d;
}

struct ComparisonRow {
  double u = 0.0;
  double mc = 0.0;
  double mc_std_error = 0.0;
  double asymptotic = 0.0;
  double asymptotic_std_error = 0.0;
  double ratio = 0.0;
  double ratio_std_error = 0.0;  // MC SE and constant SE combined to first order
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  bool approaching = true;  // |ratio - 1| nonincreasing along the ladder, up to 2 ratio SE
};

inline nlohmann::json to_json(const ComparisonReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& x : r.rows) {
    rows.push_back({{"u", x.u}, {"mc", x.mc}, {"mc_std_error", x.mc_std_error},
                    {"asymptotic", x.asymptotic}, {"asymptotic_std_error", x.asymptotic_std_error},
                    {"ratio", x.ratio}, {"ratio_std_error", x.ratio_std_error}});
  }
  return {{"rows", rows}, {"approaching", r.approaching}};
}

class MismatchError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Ratio p_hat / value(u). `u` is the threshold the prediction is evaluated at.
inline ComparisonRow compare_asymptotic(const ExceedanceEstimate& estimate,
                                        const AsymptoticResult& prediction, double u) {
  if (u != estimate.u) {
    throw MismatchError("compare_asymptotic: estimate at u = " + std::to_string(estimate.u) +
                        " vs prediction at u = " + std::to_string(u));
  }
  if (!estimate.model.is_null() && prediction.theorem == "prop1" && estimate.model != prediction.inputs) {
    throw MismatchError("compare_asymptotic: estimate and prediction describe different models");
  }
  ComparisonRow row;
  row.u = u;
  row.mc = estimate.probability;
  row.mc_std_error = estimate.std_error;
  row.asymptotic = prediction.value(u);
  row.asymptotic_std_error = prediction.std_error(u);
  row.ratio = row.mc / row.asymptotic;
  const double rel_mc = row.mc > 0.0 ? row.mc_std_error / row.mc : 0.0;
  const double rel_c = prediction.constant.value > 0.0 ? prediction.constant.std_error / prediction.constant.value : 0.0;
  row.ratio_std_error = row.ratio * std::hypot(rel_mc, rel_c);
  return row;
}

inline ComparisonReport compare_ladder(const std::vector<ExceedanceEstimate>& estimates,
                                       const AsymptoticResult& prediction) {
  ComparisonReport rep;
  for (const auto& e : estimates) rep.rows.push_back(compare_asymptotic(e, prediction, e.u));
  for (std::size_t k = 1; k < rep.rows.size(); ++k) {
    const auto& a = rep.rows[k - 1];
    const auto& b = rep.rows[k];
    const double slack = 2.0 * std::hypot(a.ratio_std_error, b.ratio_std_error);
    if (std::fabs(b.ratio - 1.0) > std::fabs(a.ratio - 1.0) + slack) rep.approaching = false;
  }
  return rep;
}

}  // namespace vecext
