#pragma once

// Exact sample paths of the Gaussian building blocks: standard fBm,
// stationary processes with correlation exp(-a|t|^alpha), user covariances,
// and vectors of independent coordinates with deterministic trend.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "vecext/errors.hpp"
#include "vecext/fft.hpp"
#include "vecext/rng.hpp"

namespace vecext {

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw DomainError("alpha must lie in (0, 2], got " + std::to_string(alpha));
  }
}

// Cov(B(s), B(t)) of standard fBm with Var B(t) = |t|^alpha. Negative times
// are rejected; two-sided paths are built from increments instead.
inline double fbm_covariance(double s, double t, double alpha) {
  check_alpha(alpha);
  if (s < 0.0 || t < 0.0) throw DomainError("fbm_covariance: times must be nonnegative");
  return 0.5 * (std::pow(s, alpha) + std::pow(t, alpha) - std::pow(std::fabs(t - s), alpha));
}

// Joint discretized path of n coordinates on a uniform grid 0 = t_0 < ... < t_m.
struct GridPath {
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // values[i][k] = X_i(t_k)

  std::size_t dim() const { return values.size(); }
  std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
  double step() const { return steps() == 0 ? 0.0 : times[1] - times[0]; }
};

inline std::vector<double> uniform_grid(double horizon, std::size_t m) {
  std::vector<double> times(m + 1);
  const double delta = horizon / static_cast<double>(m);
  for (std::size_t k = 0; k <= m; ++k) times[k] = delta * static_cast<double>(k);
  times[m] = horizon;
  return times;
}

inline void write_csv(std::ostream& out, const GridPath& path) {
  out << "t";
  for (std::size_t i = 0; i < path.dim(); ++i) out << ",x" << (i + 1);
  out << '\n';
  out.precision(17);
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    out << path.times[k];
    for (std::size_t i = 0; i < path.dim(); ++i) out << ',' << path.values[i][k];
    out << '\n';
  }
}

namespace detail {

// Lower-triangular factor of a positive semidefinite matrix (row-major, size
// d x d). Pivots below tol * max diagonal are treated as zero.
inline std::vector<double> semidefinite_cholesky(std::vector<double> a, std::size_t d) {
  double max_diag = 0.0;
  for (std::size_t i = 0; i < d; ++i) max_diag = std::max(max_diag, a[i * d + i]);
  const double tol = 1e-12 * std::max(max_diag, 1e-300);
  std::vector<double> l(d * d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double pivot = a[j * d + j];
    for (std::size_t k = 0; k < j; ++k) pivot -= l[j * d + k] * l[j * d + k];
    if (pivot < -1e-8 * std::max(max_diag, 1e-300)) {
      throw EmbeddingError("Cholesky fallback: matrix is not positive semidefinite", pivot);
    }
    if (pivot <= tol) continue;
    const double root = std::sqrt(pivot);
    l[j * d + j] = root;
    for (std::size_t i = j + 1; i < d; ++i) {
      double v = a[i * d + j];
      const double* li = &l[i * d];
      const double* lj = &l[j * d];
      for (std::size_t k = 0; k < j; ++k) v -= li[k] * lj[k];
      l[i * d + j] = v / root;
    }
  }
  return l;
}

}  // namespace detail

enum class SamplerMethod { independent_increments, linear, circulant, cholesky };

inline const char* to_string(SamplerMethod method) {
  switch (method) {
    case SamplerMethod::independent_increments: return "independent_increments";
    case SamplerMethod::linear: return "linear";
    case SamplerMethod::circulant: return "circulant";
    case SamplerMethod::cholesky: return "cholesky";
  }
  return "?";
}

// Exact sampler for a stationary Gaussian sequence X_0..X_{len-1} with
// autocovariance gamma(k), via circulant embedding. Embeddings of size
// 2M, 4M, 8M (M = next power of two >= len) are tried; eigenvalues above
// -1e-10 * max eigenvalue are clipped to zero.
class CirculantSampler {
 public:
  static constexpr double kNegativeTolerance = 1e-10;

  CirculantSampler(const std::function<double(std::size_t)>& autocov, std::size_t len)
      : len_(len) {
    const std::size_t base = std::bit_ceil(std::max<std::size_t>(len, 1));
    double worst = 0.0;
    for (std::size_t factor = 1; factor <= 4; factor *= 2) {
      if (try_embedding(autocov, base * factor, worst)) return;
    }
    throw EmbeddingError("circulant embedding has a negative eigenvalue", worst);
  }

  std::size_t length() const { return len_; }
  std::size_t embedding_size() const { return plan_ ? plan_->size() : 0; }

  void sample(RandomStream& rng, std::span<double> out) const {
    thread_local std::vector<std::complex<double>> work;
    const std::size_t n = plan_->size();
    work.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double re = rng.normal();
      const double im = rng.normal();
      work[k] = {root_[k] * re, root_[k] * im};
    }
    plan_->forward(work);
    for (std::size_t j = 0; j < len_; ++j) out[j] = work[j].real();
  }

 private:
  bool try_embedding(const std::function<double(std::size_t)>& autocov, std::size_t half,
                     double& worst) {
    const std::size_t n = 2 * half;
    std::vector<std::complex<double>> row(n);
    for (std::size_t k = 0; k <= half; ++k) row[k] = autocov(k);
    for (std::size_t k = half + 1; k < n; ++k) row[k] = row[n - k];
    auto plan = std::make_unique<FftPlan>(n);
    plan->forward(row);
    double max_eig = 0.0;
    double min_eig = 0.0;
    for (const auto& v : row) {
      max_eig = std::max(max_eig, v.real());
      min_eig = std::min(min_eig, v.real());
    }
    if (min_eig < -kNegativeTolerance * max_eig) {
      worst = min_eig;
      return false;
    }
    root_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      root_[k] = std::sqrt(std::max(row[k].real(), 0.0) / static_cast<double>(n));
    }
    plan_ = std::move(plan);
    return true;
  }

  std::size_t len_;
  std::shared_ptr<const FftPlan> plan_;
  std::vector<double> root_;
};

// Exact sampler from an explicit covariance matrix.
class CholeskySampler {
 public:
  static constexpr std::size_t kMaxSize = 4097;

  CholeskySampler(const std::vector<double>& gram, std::size_t d) : d_(d) {
    if (d > kMaxSize) {
      throw EmbeddingError("Cholesky fallback limited to grids of at most 4096 steps", 0.0);
    }
    factor_ = detail::semidefinite_cholesky(gram, d);
  }

  std::size_t length() const { return d_; }

  void sample(RandomStream& rng, std::span<double> out) const {
    thread_local std::vector<double> z;
    z.resize(d_);
    for (auto& v : z) v = rng.normal();
    for (std::size_t i = 0; i < d_; ++i) {
      const double* li = &factor_[i * d_];
      double acc = 0.0;
      for (std::size_t k = 0; k <= i; ++k) acc += li[k] * z[k];
      out[i] = acc;
    }
  }

 private:
  std::size_t d_;
  std::vector<double> factor_;
};

// Covariance models for one coordinate.
struct FBm {
  double alpha = 1.0;
};

// Unit-variance stationary process with correlation exp(-a |t|^alpha).
struct StationaryExp {
  double a = 1.0;
  double alpha = 1.0;
};

struct UserCovariance {
  std::function<double(double, double)> cov;
};

using Covariance = std::variant<FBm, StationaryExp, UserCovariance>;

struct CoordSpec {
  Covariance covariance = FBm{};
  std::function<double(double)> trend;  // empty means h_i = 0
  double scale = 1.0;                   // path divisor d_i

  double trend_at(double t) const { return trend ? trend(t) : 0.0; }
};

struct ProcessSpec {
  std::vector<CoordSpec> coords;
  double horizon = 1.0;

  std::size_t dim() const { return coords.size(); }

  void validate() const {
    if (coords.empty()) throw DomainError("ProcessSpec: at least one coordinate required");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
      throw DomainError("ProcessSpec: horizon must be finite and positive");
    }
    for (std::size_t i = 0; i < coords.size(); ++i) {
      const auto& c = coords[i];
      try {
        if (!(c.scale > 0.0)) throw DomainError("scale d_i must be positive");
        std::visit(
            [](const auto& cov) {
              using T = std::decay_t<decltype(cov)>;
              if constexpr (std::is_same_v<T, FBm>) {
                check_alpha(cov.alpha);
              } else if constexpr (std::is_same_v<T, StationaryExp>) {
                check_alpha(cov.alpha);
                if (!(cov.a > 0.0)) throw DomainError("StationaryExp: a must be positive");
              } else {
                if (!cov.cov) throw DomainError("UserCovariance: empty callable");
              }
            },
            c.covariance);
      } catch (const DomainError& e) {
        throw CoordinateError(i, e.what());
      }
    }
  }
};

// Prepared sampler of one coordinate on the grid t_k = k T / m, k = 0..m.
// Writes raw (unscaled, trend-free) values.
class CoordinateSampler {
 public:
  CoordinateSampler(const Covariance& covariance, double horizon, std::size_t m)
      : m_(m), delta_(horizon / static_cast<double>(m)) {
    if (m < 1) throw DomainError("grid size m must be at least 1");
    if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
    std::visit([&](const auto& cov) { prepare(cov, horizon); }, covariance);
  }

  std::size_t steps() const { return m_; }
  double step() const { return delta_; }
  SamplerMethod method() const { return method_; }

  void sample(RandomStream& rng, std::span<double> out) const {
    switch (method_) {
      case SamplerMethod::independent_increments: {
        const double sd = std::sqrt(delta_);
        double x = 0.0;
        out[0] = 0.0;
        for (std::size_t k = 1; k <= m_; ++k) {
          x += sd * rng.normal();
          out[k] = x;
        }
        return;
      }
      case SamplerMethod::linear: {
        const double xi = rng.normal();
        for (std::size_t k = 0; k <= m_; ++k) out[k] = xi * delta_ * static_cast<double>(k);
        return;
      }
      case SamplerMethod::circulant:
        if (cumulative_) {
          circulant_->sample(rng, out.subspan(1, m_));
          out[0] = 0.0;
          for (std::size_t k = 1; k <= m_; ++k) out[k] += out[k - 1];
        } else {
          circulant_->sample(rng, out.subspan(0, m_ + 1));
        }
        return;
      case SamplerMethod::cholesky:
        if (cumulative_) {
          out[0] = 0.0;
          cholesky_->sample(rng, out.subspan(1, m_));
        } else {
          cholesky_->sample(rng, out.subspan(0, m_ + 1));
        }
        return;
    }
  }

 private:
  void prepare(const FBm& fbm, double horizon) {
    check_alpha(fbm.alpha);
    const double alpha = fbm.alpha;
    cumulative_ = true;
    if (alpha == 1.0) {
      method_ = SamplerMethod::independent_increments;
      return;
    }
    if (alpha == 2.0) {
      method_ = SamplerMethod::linear;
      return;
    }
    const double scale = 0.5 * std::pow(delta_, alpha);
    auto fgn = [alpha, scale](std::size_t k) {
      const double kk = static_cast<double>(k);
      return scale * (std::pow(kk + 1.0, alpha) - 2.0 * std::pow(kk, alpha) +
                      std::pow(std::fabs(kk - 1.0), alpha));
    };
    try {
      circulant_ = std::make_shared<CirculantSampler>(fgn, m_);
      method_ = SamplerMethod::circulant;
    } catch (const EmbeddingError&) {
      if (m_ > 4096) throw;
      std::vector<double> gram(m_ * m_);
      for (std::size_t i = 0; i < m_; ++i) {
        for (std::size_t j = 0; j < m_; ++j) {
          gram[i * m_ + j] = fbm_covariance(delta_ * (i + 1.0), delta_ * (j + 1.0), alpha);
        }
      }
      cholesky_ = std::make_shared<CholeskySampler>(gram, m_);
      method_ = SamplerMethod::cholesky;
    }
    (void)horizon;
  }

  void prepare(const StationaryExp& st, double horizon) {
    check_alpha(st.alpha);
    if (!(st.a > 0.0)) throw DomainError("StationaryExp: a must be positive");
    cumulative_ = false;
    const double a = st.a;
    const double alpha = st.alpha;
    const double delta = delta_;
    auto corr = [a, alpha, delta](std::size_t k) {
      return std::exp(-a * std::pow(delta * static_cast<double>(k), alpha));
    };
    try {
      circulant_ = std::make_shared<CirculantSampler>(corr, m_ + 1);
      method_ = SamplerMethod::circulant;
    } catch (const EmbeddingError&) {
      if (m_ > 4096) throw;
      const std::size_t d = m_ + 1;
      std::vector<double> gram(d * d);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) gram[i * d + j] = corr(i > j ? i - j : j - i);
      }
      cholesky_ = std::make_shared<CholeskySampler>(gram, d);
      method_ = SamplerMethod::cholesky;
    }
    (void)horizon;
  }

  void prepare(const UserCovariance& user, double horizon) {
    if (!user.cov) throw DomainError("UserCovariance: empty callable");
    cumulative_ = false;
    const std::size_t d = m_ + 1;
    if (d > CholeskySampler::kMaxSize) {
      throw EmbeddingError("user covariances are limited to grids of at most 4096 steps", 0.0);
    }
    const auto times = uniform_grid(horizon, m_);
    std::vector<double> gram(d * d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) gram[i * d + j] = user.cov(times[i], times[j]);
    }
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const double x = gram[i * d + j];
        const double y = gram[j * d + i];
        if (std::fabs(x - y) > 1e-12 * std::max({1.0, std::fabs(x), std::fabs(y)})) {
          throw DomainError("UserCovariance is not symmetric on the grid");
        }
      }
    }
    cholesky_ = std::make_shared<CholeskySampler>(gram, d);
    method_ = SamplerMethod::cholesky;
  }

  std::size_t m_;
  double delta_;
  SamplerMethod method_ = SamplerMethod::cholesky;
  bool cumulative_ = false;
  std::shared_ptr<const CirculantSampler> circulant_;
  std::shared_ptr<const CholeskySampler> cholesky_;
};

// Prepared sampler for a whole ProcessSpec on a fixed grid.
class VectorSampler {
 public:
  VectorSampler(ProcessSpec spec, std::size_t m) : spec_(std::move(spec)), m_(m) {
    spec_.validate();
    times_ = uniform_grid(spec_.horizon, m_);
    for (std::size_t i = 0; i < spec_.dim(); ++i) {
      try {
        samplers_.emplace_back(spec_.coords[i].covariance, spec_.horizon, m_);
      } catch (const CoordinateError&) {
        throw;
      } catch (const std::exception& e) {
        throw CoordinateError(i, e.what());
      }
      std::vector<double> trend(m_ + 1, 0.0);
      for (std::size_t k = 0; k <= m_; ++k) trend[k] = spec_.coords[i].trend_at(times_[k]);
      trends_.push_back(std::move(trend));
    }
  }

  const ProcessSpec& spec() const { return spec_; }
  std::size_t dim() const { return spec_.dim(); }
  std::size_t steps() const { return m_; }
  const std::vector<double>& times() const { return times_; }
  const CoordinateSampler& coordinate(std::size_t i) const { return samplers_[i]; }

  // Coordinate i of the next draw: raw path / d_i (+ h_i(t_k) when requested).
  void sample_coordinate(std::size_t i, RandomStream& rng, std::span<double> out,
                         bool include_trend) const {
    samplers_[i].sample(rng, out);
    const double inv = 1.0 / spec_.coords[i].scale;
    if (inv != 1.0) {
      for (auto& v : out) v *= inv;
    }
    if (include_trend) {
      const auto& h = trends_[i];
      for (std::size_t k = 0; k <= m_; ++k) out[k] += h[k];
    }
  }

  GridPath sample(RngPolicy policy, bool include_trend) const {
    RandomStream rng(policy);
    GridPath path;
    path.times = times_;
    path.values.assign(dim(), std::vector<double>(m_ + 1));
    for (std::size_t i = 0; i < dim(); ++i) {
      sample_coordinate(i, rng, path.values[i], include_trend);
    }
    return path;
  }

 private:
  ProcessSpec spec_;
  std::size_t m_;
  std::vector<double> times_;
  std::vector<CoordinateSampler> samplers_;
  std::vector<std::vector<double>> trends_;
};

inline GridPath sample_single(const Covariance& covariance, double horizon, std::size_t m,
                              RngPolicy policy) {
  CoordinateSampler sampler(covariance, horizon, m);
  RandomStream rng(policy);
  GridPath path;
  path.times = uniform_grid(horizon, m);
  path.values.assign(1, std::vector<double>(m + 1));
  sampler.sample(rng, path.values[0]);
  return path;
}

inline GridPath sample_fbm(double alpha, double horizon, std::size_t m, RngPolicy policy) {
  check_alpha(alpha);
  return sample_single(FBm{alpha}, horizon, m, policy);
}

inline GridPath sample_stationary(double a, double alpha, double horizon, std::size_t m,
                                  RngPolicy policy) {
  return sample_single(StationaryExp{a, alpha}, horizon, m, policy);
}

inline GridPath sample_vector(const ProcessSpec& spec, std::size_t m, RngPolicy policy,
                              bool include_trend) {
  return VectorSampler(spec, m).sample(policy, include_trend);
}

}  // namespace vecext
