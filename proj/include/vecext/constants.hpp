#pragma once

// Monte Carlo estimation of Piterbarg constants P^f_{alpha,a}[S1,S2] and
// generalized Pickands constants H_{alpha,a}.
//
// Lattice discretization: the supremum over [S1,S2] is taken over the points
// j*delta (j integer) inside the interval. Paths are exact fBm on that
// lattice, two-sided when the interval reaches below 0, anchored at B(0)=0.
//
// Two estimators:
//   plain  E[ I(apexes) ] with apexes p_{k,i} = sqrt(2a_i)B_i(t_k) - a_i|t_k|^alpha_i - f_i(t_k)
//   shift  zero drift only; with Y_i = sqrt(2a_i)B_i - a_i|.|^alpha_i and window W_o = [-o, m-o],
//          P^0 = sum_{o=0..m} E[ I(Y on W_o) / sum_{r in W_o} e^{sum_i Y_i(r)} ].
//          Each term lies in [0,1], which makes long horizons feasible.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vecext/drift.hpp"
#include "vecext/errors.hpp"
#include "vecext/gauss_paths.hpp"
#include "vecext/orthant.hpp"
#include "vecext/parallel.hpp"
#include "vecext/rng.hpp"

namespace vecext {

struct PiterbargProblem {
  std::vector<double> alpha;  // size n, or 1 (broadcast)
  std::vector<double> a;      // a_i >= 0
  DriftSpec drift;            // size n, or empty (all zero)

  std::size_t dim() const { return a.size(); }
  double alpha_at(std::size_t i) const { return alpha.size() == 1 ? alpha[0] : alpha[i]; }
  const Drift& drift_at(std::size_t i) const {
    static const Drift zero = ZeroDrift{};
    return drift.empty() ? zero : drift[i];
  }
  bool zero_drift() const {
    return std::all_of(drift.begin(), drift.end(), [](const Drift& d) { return is_zero(d); });
  }
  bool all_a_zero() const {
    return std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; });
  }

  void validate() const {
    if (a.empty()) throw DomainError("Piterbarg problem: at least one coordinate required");
    if (alpha.size() != 1 && alpha.size() != a.size()) {
      throw DomainError("Piterbarg problem: alpha list must have 1 or n entries");
    }
    if (!drift.empty() && drift.size() != a.size()) {
      throw DomainError("Piterbarg problem: drift list must have n entries");
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      check_alpha(alpha_at(i));
      if (!(a[i] >= 0.0) || !std::isfinite(a[i])) {
        throw DomainError("Piterbarg problem: a_i must be finite and nonnegative");
      }
    }
  }
};

struct LadderRung {
  double s1 = 0.0;
  double s2 = 0.0;
  double value = 0.0;
  double std_error = 0.0;
};

struct ConstantEstimate {
  std::string kind = "piterbarg";  // piterbarg | pickands
  std::string method = "plain";    // plain | shift | exact | closed
  double value = 0.0;
  double std_error = 0.0;
  double delta = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  std::uint64_t replicates = 0;
  std::size_t batches = 0;
  std::vector<double> alpha;
  std::vector<double> a;
  std::string drift = "zero";
  std::uint64_t seed = 0;
  std::vector<LadderRung> ladder;
  std::optional<double> slope;  // Pickands: regression slope of P[0,T] on T
  std::optional<double> slope_std_error;
  bool coercive = true;  // limit runs: drift provably coercive on the unbounded side(s)
};

// Raised when a horizon ladder does not settle; carries the rungs computed.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, ConstantEstimate partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const ConstantEstimate& partial() const { return partial_; }
  const std::vector<LadderRung>& ladder() const { return partial_.ladder; }

 private:
  ConstantEstimate partial_;
};

inline nlohmann::json to_json(const ConstantEstimate& e) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
  };
  nlohmann::json j;
  j["kind"] = e.kind;
  j["method"] = e.method;
  j["value"] = e.value;
  j["std_error"] = e.std_error;
  j["delta"] = e.delta;
  j["S1"] = num(e.s1);
  j["S2"] = num(e.s2);
  j["replicates"] = e.replicates;
  j["batches"] = e.batches;
  j["alpha"] = e.alpha;
  j["a"] = e.a;
  j["drift"] = e.drift;
  j["seed"] = e.seed;
  j["coercive"] = e.coercive;
  auto& ladder = j["ladder"] = nlohmann::json::array();
  for (const auto& r : e.ladder) {
    ladder.push_back({{"S1", r.s1}, {"S2", r.s2}, {"value", r.value}, {"std_error", r.std_error}});
  }
  if (e.slope) j["slope"] = *e.slope;
  if (e.slope_std_error) j["slope_std_error"] = *e.slope_std_error;
  return j;
}

struct EstimatorOptions {
  double delta = 0.0;  // 0: 2^-8 * min(1, S2 - S1)
  std::uint64_t replicates = 100000;
  std::size_t batches = 50;
  unsigned threads = 0;
  RngPolicy rng{};
  std::size_t offset_samples = 16;  // shift estimator, n >= 2: stratified window offsets per rung
};

inline double default_delta(double s1, double s2) {
  const double len = s2 - s1;
  return std::ldexp(1.0, -8) * (len > 0.0 ? std::min(1.0, len) : 1.0);
}

namespace detail {

inline constexpr double kLatticeSlack = 1e-9;

// Exact fBm on the lattice points lo..hi (times j*delta), anchored at B(0)=0.
class LatticeFbm {
 public:
  LatticeFbm(double alpha, double delta, long lo, long hi) : lo_(lo), hi_(hi) {
    base_ = std::min(lo, 0L);
    const long top = std::max(hi, 0L);
    steps_ = static_cast<std::size_t>(top - base_);
    if (steps_ > 0) {
      sampler_.emplace(FBm{alpha}, delta * static_cast<double>(steps_), steps_);
    }
  }

  std::size_t size() const { return static_cast<std::size_t>(hi_ - lo_ + 1); }

  void sample(RandomStream& rng, double* out) const {
    if (steps_ == 0) {
      out[0] = 0.0;
      return;
    }
    thread_local std::vector<double> buf;
    buf.resize(steps_ + 1);
    sampler_->sample(rng, buf);
    const double anchor = buf[static_cast<std::size_t>(-base_)];
    for (long j = lo_; j <= hi_; ++j) {
      out[j - lo_] = buf[static_cast<std::size_t>(j - base_)] - anchor;
    }
  }

 private:
  long lo_;
  long hi_;
  long base_ = 0;
  std::size_t steps_ = 0;
  std::optional<CoordinateSampler> sampler_;
};

inline double two_sided_fbm_covariance(double s, double t, double alpha) {
  return 0.5 * (std::pow(std::fabs(s), alpha) + std::pow(std::fabs(t), alpha) -
                std::pow(std::fabs(t - s), alpha));
}

// Exact fBm at a handful of arbitrary times (Cholesky).
class PointFbm {
 public:
  PointFbm(double alpha, const std::vector<double>& times) : d_(times.size()) {
    std::vector<double> gram(d_ * d_);
    for (std::size_t i = 0; i < d_; ++i) {
      for (std::size_t j = 0; j < d_; ++j) {
        gram[i * d_ + j] = two_sided_fbm_covariance(times[i], times[j], alpha);
      }
    }
    sampler_.emplace(gram, d_);
  }
  std::size_t size() const { return d_; }
  void sample(RandomStream& rng, double* out) const { sampler_->sample(rng, {out, d_}); }

 private:
  std::size_t d_;
  std::optional<CholeskySampler> sampler_;
};

}  // namespace detail

// Path model for the plain estimator on [S1,S2]: fixed sample times plus,
// per coordinate, scale sqrt(2 a_i) and deterministic part a_i|t|^alpha_i + f_i(t).
class PiterbargPathModel {
 public:
  PiterbargPathModel(PiterbargProblem problem, double s1, double s2, double delta)
      : problem_(std::move(problem)), delta_(delta) {
    problem_.validate();
    if (!std::isfinite(s1) || !std::isfinite(s2) || s1 > s2) {
      throw DomainError("Piterbarg estimate: need finite S1 <= S2");
    }
    if (!(delta > 0.0)) throw DomainError("Piterbarg estimate: grid step must be positive");
    const long lo = static_cast<long>(std::ceil(s1 / delta - detail::kLatticeSlack));
    const long hi = static_cast<long>(std::floor(s2 / delta + detail::kLatticeSlack));
    const std::size_t n = problem_.dim();
    if (s1 == s2) {
      times_ = {s1};
    } else if (lo > hi) {
      times_ = {s1, s2};  // interval shorter than one step and off the lattice
    } else {
      lattice_ = true;
      for (long j = lo; j <= hi; ++j) times_.push_back(static_cast<double>(j) * delta);
    }
    scale_.resize(n);
    det_.assign(n, std::vector<double>(times_.size()));
    for (std::size_t i = 0; i < n; ++i) {
      const double ai = problem_.a[i];
      const double al = problem_.alpha_at(i);
      scale_[i] = std::sqrt(2.0 * ai);
      for (std::size_t k = 0; k < times_.size(); ++k) {
        const double t = times_[k];
        det_[i][k] = (ai > 0.0 ? ai * std::pow(std::fabs(t), al) : 0.0) +
                     evaluate(problem_.drift_at(i), t);
      }
      if (ai > 0.0) {
        if (lattice_) {
          lattice_samplers_.emplace_back(al, delta, lo, hi);
        } else {
          point_samplers_.emplace_back(al, times_);
        }
        random_.push_back(i);
      }
    }
  }

  const std::vector<double>& times() const { return times_; }
  const PiterbargProblem& problem() const { return problem_; }
  bool deterministic() const { return random_.empty(); }

  // Writes the n x K apex matrix (coordinate-major) for one replicate.
  void apexes(RandomStream& rng, std::vector<std::vector<double>>& out) const {
    const std::size_t n = problem_.dim();
    const std::size_t k_count = times_.size();
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i].assign(k_count, 0.0);
    for (std::size_t r = 0; r < random_.size(); ++r) {
      const std::size_t i = random_[r];
      if (lattice_) {
        lattice_samplers_[r].sample(rng, out[i].data());
      } else {
        point_samplers_[r].sample(rng, out[i].data());
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < k_count; ++k) out[i][k] = scale_[i] * out[i][k] - det_[i][k];
    }
  }

  // Orthant-union integral of the apexes with time index in [k0, k1].
  static double functional(const std::vector<std::vector<double>>& p, std::size_t k0,
                           std::size_t k1) {
    const std::size_t n = p.size();
    if (n == 1) {
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t k = k0; k <= k1; ++k) top = std::max(top, p[0][k]);
      return std::exp(top);
    }
    std::vector<double> raw;
    raw.reserve((k1 - k0 + 1) * n);
    for (std::size_t k = k0; k <= k1; ++k) {
      for (std::size_t i = 0; i < n; ++i) raw.push_back(p[i][k]);
    }
    return orthant_integral(ApexSet(n, std::move(raw)));
  }

  double sample_functional(RandomStream& rng) const {
    thread_local std::vector<std::vector<double>> p;
    apexes(rng, p);
    return functional(p, 0, times_.size() - 1);
  }

 private:
  PiterbargProblem problem_;
  double delta_;
  bool lattice_ = false;
  std::vector<double> times_;
  std::vector<double> scale_;
  std::vector<std::vector<double>> det_;
  std::vector<std::size_t> random_;
  std::vector<detail::LatticeFbm> lattice_samplers_;
  std::vector<detail::PointFbm> point_samplers_;
};

// Zero-drift estimator: P^0 over lattice windows of m_k + 1 points for every
// requested m_k, all from one simulation on the lattice [-M, M].
class ShiftAverageModel {
 public:
  ShiftAverageModel(const PiterbargProblem& problem, double delta, std::vector<long> windows,
                    std::size_t offset_samples)
      : windows_(std::move(windows)), offset_samples_(std::max<std::size_t>(offset_samples, 1)) {
    problem.validate();
    if (windows_.empty()) throw DomainError("shift estimator: no windows");
    for (long w : windows_) {
      if (w < 0) throw DomainError("shift estimator: negative window");
      max_window_ = std::max(max_window_, w);
    }
    for (std::size_t i = 0; i < problem.dim(); ++i) {
      if (problem.a[i] == 0.0) continue;  // Y_i = 0 does not change the functional
      const double al = problem.alpha_at(i);
      samplers_.emplace_back(al, delta, -max_window_, max_window_);
      scale_.push_back(std::sqrt(2.0 * problem.a[i]));
      std::vector<double> det(2 * max_window_ + 1);
      for (long j = -max_window_; j <= max_window_; ++j) {
        det[j + max_window_] = problem.a[i] * std::pow(std::fabs(static_cast<double>(j) * delta), al);
      }
      det_.push_back(std::move(det));
    }
    if (samplers_.empty()) throw DomainError("shift estimator: needs some a_i > 0");
  }

  std::size_t outputs() const { return windows_.size(); }

  // out[k] = single-replicate estimate of P^0 over a window of windows_[k] steps.
  void sample(RandomStream& rng, std::span<double> out) const {
    const std::size_t n = samplers_.size();
    const std::size_t len = static_cast<std::size_t>(2 * max_window_ + 1);
    thread_local std::vector<std::vector<double>> y;
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i].resize(len);
      samplers_[i].sample(rng, y[i].data());
      for (std::size_t k = 0; k < len; ++k) y[i][k] = scale_[i] * y[i][k] - det_[i][k];
    }
    if (n == 1) {
      sample_1d(y[0], out);
    } else {
      sample_nd(rng, y, out);
    }
  }

 private:
  // Y indexed by j + M. Prefix maxima / exp sums outward from 0 give every
  // window in O(M).
  void sample_1d(const std::vector<double>& y, std::span<double> out) const {
    const long m = max_window_;
    thread_local std::vector<double> lmax, rmax, lsum, rsum;
    const auto sz = static_cast<std::size_t>(m + 1);
    lmax.resize(sz);
    rmax.resize(sz);
    lsum.resize(sz);
    rsum.resize(sz);
    auto ex = [](double v) { return v < -60.0 ? 0.0 : std::exp(v); };
    lmax[0] = rmax[0] = 0.0;
    lsum[0] = rsum[0] = 1.0;
    for (long o = 1; o <= m; ++o) {
      const double yl = y[static_cast<std::size_t>(m - o)];
      const double yr = y[static_cast<std::size_t>(m + o)];
      lmax[o] = std::max(lmax[o - 1], yl);
      rmax[o] = std::max(rmax[o - 1], yr);
      lsum[o] = lsum[o - 1] + ex(yl);
      rsum[o] = rsum[o - 1] + ex(yr);
    }
    for (std::size_t k = 0; k < windows_.size(); ++k) {
      const long w = windows_[k];
      double total = 0.0;
      for (long o = 0; o <= w; ++o) {
        const double top = std::max(lmax[o], rmax[w - o]);
        total += std::exp(top) / (lsum[o] + rsum[w - o] - 1.0);
      }
      out[k] = total;
    }
  }

  void sample_nd(RandomStream& rng, const std::vector<std::vector<double>>& y,
                 std::span<double> out) const {
    const std::size_t n = y.size();
    const long m = max_window_;
    for (std::size_t k = 0; k < windows_.size(); ++k) {
      const long w = windows_[k];
      const auto count = static_cast<std::size_t>(w + 1);
      const std::size_t strata = std::min(offset_samples_, count);
      double total = 0.0;
      for (std::size_t s = 0; s < strata; ++s) {
        const std::size_t begin = count * s / strata;
        const std::size_t end = count * (s + 1) / strata;
        const std::size_t size = end - begin;
        std::size_t o = begin;
        if (size > 1) {
          o += std::min(size - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(size)));
        }
        const long lo = m - static_cast<long>(o);
        const long hi = lo + w;
        std::vector<double> raw;
        raw.reserve(count * n);
        double denom = 0.0;
        for (long j = lo; j <= hi; ++j) {
          double s_sum = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            const double v = y[i][static_cast<std::size_t>(j)];
            raw.push_back(v);
            s_sum += v;
          }
          if (s_sum > -60.0) denom += std::exp(s_sum);
        }
        const double num = orthant_integral(ApexSet(n, std::move(raw)));
        total += static_cast<double>(size) * num / denom;
      }
      out[k] = total;
    }
  }

  std::vector<long> windows_;
  long max_window_ = 0;
  std::size_t offset_samples_;
  std::vector<detail::LatticeFbm> samplers_;
  std::vector<double> scale_;
  std::vector<std::vector<double>> det_;
};

namespace detail {

inline ConstantEstimate echo(const PiterbargProblem& problem, double s1, double s2, double delta,
                             const EstimatorOptions& opt) {
  ConstantEstimate e;
  e.delta = delta;
  e.s1 = s1;
  e.s2 = s2;
  e.alpha.resize(problem.dim());
  for (std::size_t i = 0; i < problem.dim(); ++i) e.alpha[i] = problem.alpha_at(i);
  e.a = problem.a;
  DriftSpec d = problem.drift;
  if (d.empty()) d.assign(problem.dim(), ZeroDrift{});
  e.drift = drift_id(d);
  e.seed = opt.rng.master_seed;
  e.replicates = opt.replicates;
  e.batches = std::min<std::uint64_t>(opt.batches, opt.replicates);
  return e;
}

inline long lattice_steps(double length, double delta) {
  return static_cast<long>(std::floor(length / delta + kLatticeSlack));
}

}  // namespace detail

// Estimate of P^f_{alpha,a}[S1,S2] (finite S1 <= S2).
inline ConstantEstimate piterbarg_estimate(const PiterbargProblem& problem, double s1, double s2,
                                           EstimatorOptions opt = {}) {
  problem.validate();
  if (!std::isfinite(s1) || !std::isfinite(s2)) {
    throw DomainError("piterbarg_estimate: use piterbarg_limit for infinite intervals");
  }
  if (s1 > s2) throw DomainError("piterbarg_estimate: invalid interval, S1 > S2");
  if (opt.replicates == 0) throw DomainError("piterbarg_estimate: at least one replicate");
  const double delta = opt.delta > 0.0 ? opt.delta : default_delta(s1, s2);
  auto est = detail::echo(problem, s1, s2, delta, opt);
  const BatchOptions bopt{opt.batches, opt.threads};

  if (problem.zero_drift()) {
    if (problem.all_a_zero()) {
      est.method = "exact";
      est.value = 1.0;
      return est;
    }
    // P^0 is shift invariant, so only the number of lattice steps matters.
    const long steps = s1 == s2 ? 0 : std::max(0L, detail::lattice_steps(s2 - s1, delta));
    if (steps == 0) {
      est.method = "exact";
      est.value = 1.0;
      return est;
    }
    const ShiftAverageModel model(problem, delta, {steps}, opt.offset_samples);
    const auto stats = run_batches_scalar(
        opt.replicates,
        [&](std::uint64_t r) {
          RandomStream rng(opt.rng.with_stream(r));
          double v = 0.0;
          model.sample(rng, {&v, 1});
          return v;
        },
        bopt);
    est.method = "shift";
    est.value = stats.mean;
    est.std_error = stats.std_error;
    return est;
  }

  const PiterbargPathModel model(problem, s1, s2, delta);
  if (model.deterministic()) {
    RandomStream rng(opt.rng);
    est.method = "exact";
    est.value = model.sample_functional(rng);
    return est;
  }
  const auto stats = run_batches_scalar(
      opt.replicates,
      [&](std::uint64_t r) {
        RandomStream rng(opt.rng.with_stream(r));
        return model.sample_functional(rng);
      },
      bopt);
  est.method = "plain";
  est.value = stats.mean;
  est.std_error = stats.std_error;
  return est;
}

// Plain estimates over nested subintervals [lo_k, hi_k] of [S1,S2], all from the
// same simulated paths (so values are pathwise monotone under inclusion).
inline std::vector<ConstantEstimate> piterbarg_nested(const PiterbargProblem& problem, double s1,
                                                      double s2,
                                                      const std::vector<std::pair<double, double>>& subs,
                                                      EstimatorOptions opt = {}) {
  const double delta = opt.delta > 0.0 ? opt.delta : default_delta(s1, s2);
  const PiterbargPathModel model(problem, s1, s2, delta);
  const auto& times = model.times();
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (const auto& [lo, hi] : subs) {
    if (lo > hi || lo < s1 || hi > s2) throw DomainError("piterbarg_nested: subinterval outside [S1,S2]");
    const auto first = std::lower_bound(times.begin(), times.end(), lo - detail::kLatticeSlack * delta);
    const auto last = std::upper_bound(times.begin(), times.end(), hi + detail::kLatticeSlack * delta);
    if (first >= last) throw DomainError("piterbarg_nested: subinterval contains no sample time");
    ranges.emplace_back(first - times.begin(), (last - times.begin()) - 1);
  }
  const auto stats = run_batches(
      opt.replicates, ranges.size(),
      [&](std::uint64_t r, std::span<double> out) {
        RandomStream rng(opt.rng.with_stream(r));
        thread_local std::vector<std::vector<double>> p;
        model.apexes(rng, p);
        for (std::size_t k = 0; k < ranges.size(); ++k) {
          out[k] = PiterbargPathModel::functional(p, ranges[k].first, ranges[k].second);
        }
      },
      BatchOptions{opt.batches, opt.threads});
  std::vector<ConstantEstimate> out;
  for (std::size_t k = 0; k < ranges.size(); ++k) {
    auto e = detail::echo(problem, subs[k].first, subs[k].second, delta, opt);
    e.method = "plain";
    e.value = stats[k].mean;
    e.std_error = stats[k].std_error;
    out.push_back(std::move(e));
  }
  return out;
}

enum class LimitSide { half_line, whole_line };  // [0,inf) | (-inf,inf)

struct LimitOptions {
  EstimatorOptions estimator{};
  double initial_horizon = 4.0;
  std::size_t max_rungs = 6;
  double rel_tol = 0.02;
};

// P^f over [S1,S2] where either end may be infinite. Finite intervals are
// estimated directly; otherwise each unbounded side is cut at distance H
// beyond the finite part, H doubling from the initial horizon, until two
// successive rungs differ by less than max(2 pooled SE, rel_tol * value).
inline ConstantEstimate piterbarg_interval(const PiterbargProblem& problem, double s1, double s2,
                                           LimitOptions opt = {}) {
  problem.validate();
  if (std::isnan(s1) || std::isnan(s2) || !(s1 < s2 || (s1 == s2 && std::isfinite(s1)))) {
    throw DomainError("piterbarg: invalid interval");
  }
  if (std::isinf(s1) && s1 > 0) throw DomainError("piterbarg: S1 = +inf");
  if (std::isinf(s2) && s2 < 0) throw DomainError("piterbarg: S2 = -inf");
  if (std::isfinite(s1) && std::isfinite(s2)) return piterbarg_estimate(problem, s1, s2, opt.estimator);
  if (!(opt.initial_horizon > 0.0)) throw DomainError("piterbarg_limit: initial horizon must be positive");
  if (opt.max_rungs < 2) throw DomainError("piterbarg_limit: at least two rungs");
  bool coercive = true;
  for (std::size_t i = 0; i < problem.dim(); ++i) {
    const auto& d = problem.drift_at(i);
    if (std::isinf(s2)) coercive = coercive && coercive_towards(d, +1);
    if (std::isinf(s1)) coercive = coercive && coercive_towards(d, -1);
  }
  // A fixed step across rungs keeps the lattices nested.
  EstimatorOptions eopt = opt.estimator;
  if (!(eopt.delta > 0.0)) eopt.delta = std::ldexp(1.0, -8);

  std::vector<LadderRung> ladder;
  ConstantEstimate last;
  double horizon = opt.initial_horizon;
  for (std::size_t k = 0; k < opt.max_rungs; ++k, horizon *= 2.0) {
    const double lo = std::isinf(s1) ? std::min(s2, 0.0) - horizon : s1;
    const double hi = std::isinf(s2) ? std::max(s1, 0.0) + horizon : s2;
    last = piterbarg_estimate(problem, lo, hi, eopt);
    ladder.push_back({lo, hi, last.value, last.std_error});
    if (k == 0) continue;
    const auto& prev = ladder[k - 1];
    const double diff = std::fabs(last.value - prev.value);
    const double pooled = std::hypot(last.std_error, prev.std_error);
    if (diff < std::max(2.0 * pooled, opt.rel_tol * std::fabs(last.value))) {
      last.s1 = s1;
      last.s2 = s2;
      last.ladder = ladder;
      last.coercive = coercive;
      return last;
    }
  }
  last.s1 = s1;
  last.s2 = s2;
  last.ladder = ladder;
  last.coercive = coercive;
  throw ConvergenceError("piterbarg_limit: horizon ladder did not converge after " +
                             std::to_string(opt.max_rungs) + " rungs",
                         last);
}

// P^f[0,inf) or P^f(-inf,inf).
inline ConstantEstimate piterbarg_limit(const PiterbargProblem& problem, LimitSide side,
                                        LimitOptions opt = {}) {
  const double inf = std::numeric_limits<double>::infinity();
  return piterbarg_interval(problem, side == LimitSide::half_line ? 0.0 : -inf, inf, opt);
}

struct PickandsOptions {
  EstimatorOptions estimator{};  // delta 0 means 2^-8
  std::vector<double> horizons{8.0, 16.0, 32.0, 64.0};
  double rel_tol = 0.1;  // |P[0,T]/T - slope| tolerance at the top rung
};

// H_{alpha,a} = lim P^0[0,T]/T; returns the top rung's P^0[0,T]/T, with the
// slope of P^0[0,T] against T as a diagnostic. All rungs share one simulation.
inline ConstantEstimate pickands_estimate(std::vector<double> alpha, std::vector<double> a,
                                          PickandsOptions opt = {}) {
  PiterbargProblem problem{std::move(alpha), std::move(a), {}};
  problem.validate();
  if (problem.all_a_zero()) throw DomainError("pickands_estimate: needs some a_i > 0");
  if (opt.horizons.empty()) throw DomainError("pickands_estimate: empty horizon ladder");
  std::sort(opt.horizons.begin(), opt.horizons.end());
  auto& eo = opt.estimator;
  if (!(eo.delta > 0.0)) eo.delta = std::ldexp(1.0, -8);
  std::vector<long> windows;
  for (double h : opt.horizons) {
    if (!(h > 0.0)) throw DomainError("pickands_estimate: horizons must be positive");
    windows.push_back(detail::lattice_steps(h, eo.delta));
  }
  const ShiftAverageModel model(problem, eo.delta, windows, eo.offset_samples);
  const auto stats = run_batches(
      eo.replicates, model.outputs(),
      [&](std::uint64_t r, std::span<double> out) {
        RandomStream rng(eo.rng.with_stream(r));
        model.sample(rng, out);
      },
      BatchOptions{eo.batches, eo.threads});

  const double t_top = opt.horizons.back();
  auto est = detail::echo(problem, 0.0, t_top, eo.delta, eo);
  est.kind = "pickands";
  est.method = "shift";
  est.value = stats.back().mean / t_top;
  est.std_error = stats.back().std_error / t_top;
  for (std::size_t k = 0; k < windows.size(); ++k) {
    est.ladder.push_back({0.0, opt.horizons[k], stats[k].mean, stats[k].std_error});
  }
  if (windows.size() >= 2) {
    // Least-squares slope, computed per batch for a batch-means error.
    const std::size_t kk = windows.size();
    double tm = 0.0;
    for (double h : opt.horizons) tm += h;
    tm /= static_cast<double>(kk);
    double sxx = 0.0;
    for (double h : opt.horizons) sxx += (h - tm) * (h - tm);
    auto slope_of = [&](auto value_at) {
      double sxy = 0.0;
      for (std::size_t k = 0; k < kk; ++k) sxy += (opt.horizons[k] - tm) * value_at(k);
      return sxy / sxx;
    };
    est.slope = slope_of([&](std::size_t k) { return stats[k].mean; });
    const std::size_t b = stats[0].batch_means.size();
    if (b > 1) {
      std::vector<double> slopes(b);
      for (std::size_t j = 0; j < b; ++j) {
        slopes[j] = slope_of([&](std::size_t k) { return stats[k].batch_means[j]; });
      }
      double mean = 0.0;
      for (double s : slopes) mean += s;
      mean /= static_cast<double>(b);
      double ss = 0.0;
      for (double s : slopes) ss += (s - mean) * (s - mean);
      est.slope_std_error = std::sqrt(ss / static_cast<double>(b - 1) / static_cast<double>(b));
    }
    const double gap = std::fabs(est.value - *est.slope);
    const double noise = 4.0 * std::hypot(est.std_error, est.slope_std_error.value_or(0.0));
    if (gap > std::max(noise, opt.rel_tol * est.value)) {
      throw ConvergenceError("pickands_estimate: P[0,T]/T = " + std::to_string(est.value) + " and the ladder slope " +
                                 std::to_string(*est.slope) +
                                 " disagree (longer horizons or a looser tolerance may be needed)",
                             est);
    }
  }
  return est;
}

// Known values: one effective coordinate with alpha in {1, 2}
// (H_{1,a} = a, H_{2,a} = sqrt(a/pi)); other cases have no closed form.
inline std::optional<double> pickands_closed_form(const std::vector<double>& alpha,
                                                  const std::vector<double>& a) {
  std::optional<std::size_t> only;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    if (only) return std::nullopt;
    only = i;
  }
  if (!only) return std::nullopt;
  const double al = alpha.size() == 1 ? alpha[0] : alpha[*only];
  const double ai = a[*only];
  if (al == 1.0) return ai;
  if (al == 2.0) return std::sqrt(ai / std::numbers::pi);
  return std::nullopt;
}

}  // namespace vecext
