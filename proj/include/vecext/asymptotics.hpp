#pragma once

// Closed-form asymptotics of P{exists t: X(t) + h(t) > u 1} with assumption
// checks. Constants without closed form come from a ConstantsProvider.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vecext/constants.hpp"
#include "vecext/drift.hpp"
#include "vecext/errors.hpp"
#include "vecext/orthant.hpp"
#include "vecext/special.hpp"

namespace vecext {

enum class Regime { sub, critical, super, plateau };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::sub: return "sub";
    case Regime::critical: return "critical";
    case Regime::super: return "super";
    case Regime::plateau: return "plateau";
  }
  return "?";
}

struct ConstantValue {
  enum class Kind { closed, estimated, one };
  Kind kind = Kind::one;
  double value = 1.0;
  double std_error = 0.0;

  static ConstantValue one() { return {}; }
  static ConstantValue closed(double v) { return {Kind::closed, v, 0.0}; }
  static ConstantValue estimated(double v, double se) { return {Kind::estimated, v, se}; }
};

inline const char* to_string(ConstantValue::Kind k) {
  switch (k) {
    case ConstantValue::Kind::closed: return "closed";
    case ConstantValue::Kind::estimated: return "estimated";
    case ConstantValue::Kind::one: return "one";
  }
  return "?";
}

// Source of Pickands and Piterbarg constants.
class ConstantsProvider {
 public:
  virtual ~ConstantsProvider() = default;
  virtual ConstantValue pickands(const std::vector<double>& alpha, const std::vector<double>& a) = 0;
  // Either end of [s1, s2] may be infinite.
  virtual ConstantValue piterbarg(const PiterbargProblem& problem, double s1, double s2) = 0;
};

// Default provider: closed forms where known, Monte Carlo otherwise; results
// are memoized per distinct request.
class MonteCarloConstants : public ConstantsProvider {
 public:
  struct Options {
    PickandsOptions pickands{};
    LimitOptions piterbarg{};
    bool use_closed_forms = true;
  };

  MonteCarloConstants() = default;
  explicit MonteCarloConstants(Options opt) : opt_(std::move(opt)) {}

  Options& options() { return opt_; }

  ConstantValue pickands(const std::vector<double>& alpha, const std::vector<double>& a) override {
    if (opt_.use_closed_forms) {
      if (auto v = pickands_closed_form(alpha, a)) return ConstantValue::closed(*v);
    }
    // One effective coordinate: H_{alpha,a} = a^{1/alpha} H_{alpha,1}, so only
    // the a = 1 constant is simulated.
    std::vector<double> al = alpha, aa = a;
    double factor = 1.0;
    std::size_t active = 0, which = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] > 0.0) ++active, which = i;
    }
    if (active == 1) {
      const double alpha_i = alpha.size() == 1 ? alpha[0] : alpha[which];
      factor = std::pow(a[which], 1.0 / alpha_i);
      al = {alpha_i};
      aa = {1.0};
    }
    const std::string key = "H|" + nlohmann::json{al, aa}.dump();
    auto it = memo_.find(key);
    if (it == memo_.end()) {
      const auto est = pickands_estimate(al, aa, opt_.pickands);
      last_ = est;
      it = memo_.emplace(key, ConstantValue::estimated(est.value, est.std_error)).first;
    }
    return ConstantValue::estimated(it->second.value * factor, it->second.std_error * factor);
  }

  ConstantValue piterbarg(const PiterbargProblem& problem, double s1, double s2) override {
    DriftSpec d = problem.drift;
    bool memoizable = true;
    for (const auto& item : d) memoizable = memoizable && !std::holds_alternative<UserDrift>(item);
    const std::string key = "P|" + nlohmann::json{problem.alpha, problem.a}.dump() + "|" +
                            drift_id(d) + "|" + nlohmann::json{s1, s2}.dump();
    if (memoizable) {
      if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    }
    const auto est = piterbarg_interval(problem, s1, s2, opt_.piterbarg);
    last_ = est;
    const ConstantValue v = est.method == "exact" ? ConstantValue::closed(est.value)
                                                  : ConstantValue::estimated(est.value, est.std_error);
    if (memoizable) memo_[key] = v;
    return v;
  }

  // The most recent Monte Carlo estimate (for diagnostics / JSON dumps).
  const std::optional<ConstantEstimate>& last_estimate() const { return last_; }

 private:
  Options opt_;
  std::map<std::string, ConstantValue> memo_;
  std::optional<ConstantEstimate> last_;
};

// Provider built from callables, for injecting known values.
class CallbackConstants : public ConstantsProvider {
 public:
  using PickandsFn = std::function<ConstantValue(const std::vector<double>&, const std::vector<double>&)>;
  using PiterbargFn = std::function<ConstantValue(const PiterbargProblem&, double, double)>;

  CallbackConstants(PickandsFn h, PiterbargFn p) : h_(std::move(h)), p_(std::move(p)) {}

  ConstantValue pickands(const std::vector<double>& alpha, const std::vector<double>& a) override {
    if (!h_) throw std::logic_error("no Pickands constant available");
    return h_(alpha, a);
  }
  ConstantValue piterbarg(const PiterbargProblem& problem, double s1, double s2) override {
    if (!p_) throw std::logic_error("no Piterbarg constant available");
    return p_(problem, s1, s2);
  }

 private:
  PickandsFn h_;
  PiterbargFn p_;
};

struct AsymptoticResult {
  std::string theorem;
  Regime regime = Regime::sub;
  double prefactor_exponent = 0.0;
  ConstantValue constant;
  std::optional<ConstantValue> pickands;   // sub-critical / plateau rows
  std::optional<double> drift_integral;    // sub-critical rows
  std::function<double(double)> log_tail_product;
  nlohmann::json inputs;

  double tail_product(double u) const { return std::exp(log_tail_product(u)); }
  double log_value(double u) const {
    return prefactor_exponent * std::log(u) + std::log(constant.value) + log_tail_product(u);
  }
  // u^{prefactor_exponent} * constant * prod Psi(...)
  double value(double u) const { return std::exp(log_value(u)); }
  // Standard error of value(u) propagated from the constant.
  double std_error(double u) const {
    return constant.value > 0.0 ? value(u) * constant.std_error / constant.value : 0.0;
  }
};

inline nlohmann::json to_json(const AsymptoticResult& r, const std::vector<double>& u_values = {}) {
  nlohmann::json c{{"kind", to_string(r.constant.kind)}, {"value", r.constant.value}};
  if (r.constant.kind == ConstantValue::Kind::estimated) c["stderr"] = r.constant.std_error;
  nlohmann::json j{{"theorem", r.theorem},
                   {"regime", to_string(r.regime)},
                   {"prefactor_exponent", r.prefactor_exponent},
                   {"constant_factor", c},
                   {"inputs", r.inputs}};
  if (r.pickands) {
    j["pickands"] = {{"kind", to_string(r.pickands->kind)}, {"value", r.pickands->value}};
    if (r.pickands->kind == ConstantValue::Kind::estimated) j["pickands"]["stderr"] = r.pickands->std_error;
  }
  if (r.drift_integral) j["drift_integral"] = *r.drift_integral;
  auto& at = j["value_at"] = nlohmann::json::array();
  for (double u : u_values) at.push_back({{"u", u}, {"value", r.value(u)}});
  return j;
}

// Conditional ruin-time CDF limit with its provenance.
struct CdfValue {
  Regime regime = Regime::sub;
  ConstantValue::Kind kind = ConstantValue::Kind::closed;
  double value = 0.0;
  double std_error = 0.0;
};

struct AssumptionReport {
  bool passed = true;
  std::vector<std::string> failures;
  std::vector<std::string> unverified;

  void fail(std::string clause) {
    passed = false;
    failures.push_back(std::move(clause));
  }
  std::string summary() const {
    std::string s;
    for (const auto& f : failures) s += (s.empty() ? "" : "; ") + f;
    return s;
  }
};

class AssumptionError : public DomainError {
 public:
  explicit AssumptionError(AssumptionReport report)
      : DomainError("assumptions violated: " + report.summary()), report_(std::move(report)) {}
  const AssumptionReport& report() const { return report_; }

 private:
  AssumptionReport report_;
};

namespace detail {

inline double inf() { return std::numeric_limits<double>::infinity(); }

inline double log_psi_product(const std::vector<double>& args) {
  double s = 0.0;
  for (double x : args) s += log_tail_psi(x);
  return s;
}

// \int_lo^hi exp(-sum_i f_i(t)) dt: Gamma closed form for power-law sums,
// adaptive quadrature otherwise.
inline double drift_integral(const DriftSpec& drifts, double lo, double hi) {
  if (auto pl = power_law_sum(drifts, lo, hi)) {
    const auto [theta, p] = *pl;
    if (theta > 0.0) return power_exponential_integral(theta, p, lo, hi);
    if (theta == 0.0 && std::isfinite(lo) && std::isfinite(hi)) return hi - lo;
  }
  auto g = [&](double t) {
    double s = 0.0;
    for (const auto& d : drifts) s += evaluate(d, t);
    return std::exp(-s);
  };
  const double v = integrate(g, lo, hi);
  if (!std::isfinite(v)) throw DomainError("drift integral diverges");
  return v;
}

// \int e^{sum w} 1{exists t in [lo,hi]: -g(t) > w} dw for the deterministic
// curve g = (g_1..g_n). Nonnegative power laws: the point nearest the origin
// dominates every other, giving exp(-sum g(t*)). Otherwise the curve is
// sampled and handed to orthant_integral.
inline double curve_orthant_integral(const DriftSpec& g, double lo, double hi) {
  bool monotone = true;
  for (const auto& d : g) {
    if (is_zero(d)) continue;
    if (const auto* p = std::get_if<PowerLaw>(&d)) {
      monotone = monotone && p->c >= 0.0;
    } else if (const auto* s = std::get_if<PowerSum>(&d)) {
      for (const auto& term : s->terms) monotone = monotone && term.c >= 0.0;
    } else if (const auto* l = std::get_if<LinearPositive>(&d)) {
      monotone = monotone && l->c >= 0.0 && lo >= 0.0;
    } else {
      monotone = false;
    }
  }
  auto total = [&](double t) {
    double s = 0.0;
    for (const auto& d : g) s += evaluate(d, t);
    return s;
  };
  if (monotone) {
    const double t_star = lo > 0.0 ? lo : (hi < 0.0 ? hi : 0.0);
    return std::exp(-total(t_star));
  }
  // Truncate unbounded sides where every further point's own orthant is negligible.
  auto cut = [&](double sign, double start) {
    double r = std::max(1.0, std::fabs(start));
    while (r < 1e8 && total(sign * r) < 50.0) r *= 2.0;
    return sign * r;
  };
  const double a = std::isinf(lo) ? cut(-1.0, hi < 0.0 ? hi : 0.0) : lo;
  const double b = std::isinf(hi) ? cut(1.0, lo > 0.0 ? lo : 0.0) : hi;
  const std::size_t n = g.size();
  constexpr std::size_t kPoints = 4097;
  ApexSet apexes(n);
  std::vector<double> p(n);
  auto add = [&](double t) {
    for (std::size_t i = 0; i < n; ++i) p[i] = -evaluate(g[i], t);
    apexes.push_back(p);
  };
  for (std::size_t k = 0; k < kPoints; ++k) add(a + (b - a) * static_cast<double>(k) / (kPoints - 1));
  if (a < 0.0 && b > 0.0) add(0.0);
  return orthant_integral(n >= 4 ? pareto_prune(apexes) : apexes);
}

inline DriftSpec scaled_spec(const DriftSpec& drifts, const std::vector<double>& factors) {
  DriftSpec out;
  for (std::size_t i = 0; i < drifts.size(); ++i) out.push_back(scaled(drifts[i], factors[i]));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Threshold families (general theorem).

struct ThresholdCoord {
  double lambda = 0.0;
  Drift drift = ZeroDrift{};
  double sigma = 1.0;
  double a = 1.0;
  double alpha = 1.0;
  std::function<double(double)> m_u;  // threshold m_{u,i}; empty means u
};

struct ThresholdFamilySpec {
  std::vector<ThresholdCoord> coords;
  double x1 = -std::numeric_limits<double>::infinity();
  double x2 = std::numeric_limits<double>::infinity();

  double lambda() const {
    double l = 0.0;
    for (const auto& c : coords) l = std::max(l, c.lambda);
    return l;
  }
  double alpha() const {
    double a = 2.0;
    for (const auto& c : coords) a = std::min(a, c.alpha);
    return a;
  }
  // f~_i = f_i 1{lambda_i = lambda}
  DriftSpec effective_drift() const {
    const double l = lambda();
    DriftSpec out;
    for (const auto& c : coords) out.push_back(c.lambda == l ? c.drift : Drift{ZeroDrift{}});
    return out;
  }
};

inline AssumptionReport check_assumptions_thm1(const ThresholdFamilySpec& spec) {
  AssumptionReport rep;
  if (spec.coords.empty()) {
    rep.fail("at least one coordinate");
    return rep;
  }
  if (!(spec.lambda() > 0.0)) rep.fail("max lambda_i > 0");
  for (std::size_t i = 0; i < spec.coords.size(); ++i) {
    const auto& c = spec.coords[i];
    const std::string tag = "coordinate " + std::to_string(i + 1) + ": ";
    if (!(c.lambda >= 0.0)) rep.fail(tag + "lambda_i >= 0");
    if (!(c.sigma > 0.0)) rep.fail(tag + "sigma_i > 0");
    if (!(c.a > 0.0)) rep.fail(tag + "a_i > 0");
    if (!(c.alpha > 0.0 && c.alpha <= 2.0)) rep.fail(tag + "alpha_i in (0,2]");
    if (std::fabs(evaluate(c.drift, 0.0)) > 1e-12) rep.fail(tag + "f_i(0) = 0");
    if (c.lambda == spec.lambda() && std::holds_alternative<UserDrift>(c.drift)) {
      rep.unverified.push_back(tag + "regular variation of a user drift at +-inf is not checked");
    }
    if (c.m_u) {
      const double probe = c.m_u(1e6) / 1e6;
      if (!(std::fabs(probe - 1.0) < 0.1)) rep.fail(tag + "m_u / u -> 1 (probe at u = 1e6)");
      rep.unverified.push_back(tag + "m_u / u -> 1 checked at one finite u only");
    }
  }
  if (!(spec.x1 < spec.x2) || (std::isinf(spec.x1) && spec.x1 > 0) || (std::isinf(spec.x2) && spec.x2 < 0)) {
    rep.fail("x1 < x2 with x1 in [-inf, inf), x2 in (-inf, inf]");
    return rep;
  }
  if (std::isinf(spec.x1) || std::isinf(spec.x2)) {
    // (FF): liminf over |t| -> inf of sum f~/sigma^2 / sum |f~|/sigma^2 > 0.
    const auto f = spec.effective_drift();
    double worst = detail::inf();
    auto probe = [&](double t) {
      double num = 0.0;
      double den = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        const double v = evaluate(f[i], t) / (spec.coords[i].sigma * spec.coords[i].sigma);
        num += v;
        den += std::fabs(v);
      }
      worst = std::min(worst, den > 0.0 ? num / den : 0.0);
    };
    for (double r = 1e3; r <= 1e6 * (1 + 1e-12); r *= std::pow(10.0, 0.25)) {
      if (std::isinf(spec.x2)) probe(std::max(spec.x1, 0.0) + r);
      if (std::isinf(spec.x1)) probe(std::min(spec.x2, 0.0) - r);
    }
    if (!(worst > 1e-9)) rep.fail("(FF): negative drift components dominate at infinity");
  }
  return rep;
}

inline AsymptoticResult thm1_asymptotic(const ThresholdFamilySpec& spec, ConstantsProvider& constants) {
  const auto rep = check_assumptions_thm1(spec);
  if (!rep.passed) throw AssumptionError(rep);
  const std::size_t n = spec.coords.size();
  const double lambda = spec.lambda();
  const double alpha = spec.alpha();
  const double crit = 2.0 / alpha;

  AsymptoticResult r;
  r.theorem = "thm1";
  r.prefactor_exponent = std::max(0.0, crit - lambda);
  std::vector<double> a_eff(n);
  std::vector<double> inv_var(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = spec.coords[i];
    inv_var[i] = 1.0 / (c.sigma * c.sigma);
    a_eff[i] = c.alpha == alpha ? c.a * inv_var[i] : 0.0;
  }
  const DriftSpec f = detail::scaled_spec(spec.effective_drift(), inv_var);

  if (lambda < crit) {
    r.regime = Regime::sub;
    const auto h = constants.pickands({alpha}, a_eff);
    const double integral = detail::drift_integral(f, spec.x1, spec.x2);
    r.pickands = h;
    r.drift_integral = integral;
    r.constant = {h.kind, h.value * integral, h.std_error * integral};
  } else if (lambda == crit) {
    r.regime = Regime::critical;
    r.constant = constants.piterbarg({{alpha}, a_eff, f}, spec.x1, spec.x2);
  } else {
    r.regime = Regime::super;
    r.constant = ConstantValue::closed(detail::curve_orthant_integral(f, spec.x1, spec.x2));
  }
  auto coords = spec.coords;
  r.log_tail_product = [coords](double u) {
    std::vector<double> args;
    for (const auto& c : coords) args.push_back((c.m_u ? c.m_u(u) : u) / c.sigma);
    return detail::log_psi_product(args);
  };
  nlohmann::json in = nlohmann::json::array();
  for (const auto& c : spec.coords) {
    in.push_back({{"lambda", c.lambda}, {"drift", drift_id(c.drift)}, {"sigma", c.sigma}, {"a", c.a},
                  {"alpha", c.alpha}});
  }
  r.inputs = {{"coords", in}, {"x1", spec.x1}, {"x2", spec.x2}};
  if (std::isinf(spec.x1)) r.inputs["x1"] = "-inf";
  if (std::isinf(spec.x2)) r.inputs["x2"] = "inf";
  return r;
}

// ---------------------------------------------------------------------------
// Non-stationary coordinates with a unique maximizer of the variance.

struct LocalCoord {
  double sigma = 1.0;  // sigma_i(t0)
  double b = 1.0;      // sigma_i(t) = sigma_i(t0) - b |t - t0|^beta (1 + o(1))
  double beta = 2.0;
  double a = 1.0;      // r_i(s,t) = 1 - a |t - s|^alpha (1 + o(1))
  double alpha = 1.0;
  double c = 0.0;      // h_i(t) = h_i(t0) - c |t - t0|^gamma (1 + o(1))
  double gamma = 1.0;
  double h = 0.0;      // h_i(t0)
};

struct LocalExpansion {
  double t0 = 0.0;
  double horizon = 1.0;  // T
  std::vector<LocalCoord> coords;
};

struct Thm2Data {
  double alpha = 0.0;
  double beta = 0.0;
  double q = 0.0;
  std::vector<double> a_eff;
  DriftSpec f;
};

inline Thm2Data thm2_data(const LocalExpansion& e) {
  if (e.coords.empty()) throw DomainError("thm2: at least one coordinate");
  if (!(e.horizon > 0.0) || !(e.t0 >= 0.0 && e.t0 <= e.horizon)) {
    throw DomainError("thm2: need 0 <= t0 <= T, T > 0");
  }
  Thm2Data d;
  d.alpha = 2.0;
  d.beta = detail::inf();
  for (std::size_t i = 0; i < e.coords.size(); ++i) {
    const auto& c = e.coords[i];
    const std::string tag = "thm2 coordinate " + std::to_string(i + 1) + ": ";
    if (!(c.sigma > 0.0)) throw DomainError(tag + "sigma_i(t0) > 0");
    if (!(c.b > 0.0)) {
      throw DomainError(tag + "b_i > 0 required; constant-variance (locally stationary) coordinates belong to thm3");
    }
    if (!(c.beta > 0.0)) throw DomainError(tag + "beta_i > 0");
    if (!(c.a > 0.0)) throw DomainError(tag + "a_i > 0");
    check_alpha(c.alpha);
    const bool sign_ok = (c.c < 0.0 && c.gamma >= c.beta / 2.0) || (c.c >= 0.0 && c.gamma > 0.0);
    if (!sign_ok) throw DomainError(tag + "need c_i < 0 with gamma_i >= beta_i/2, or c_i >= 0 with gamma_i > 0");
    d.alpha = std::min(d.alpha, c.alpha);
    d.beta = std::min({d.beta, c.beta, c.c != 0.0 ? 2.0 * c.gamma : detail::inf()});
  }
  d.q = (e.t0 > 0.0 && e.t0 < e.horizon) ? -detail::inf() : 0.0;
  for (const auto& c : e.coords) {
    d.a_eff.push_back(c.alpha == d.alpha ? c.a / (c.sigma * c.sigma) : 0.0);
    PowerSum f;
    if (c.beta == d.beta) f.terms.push_back({c.b / (c.sigma * c.sigma * c.sigma), c.beta});
    if (c.c != 0.0 && 2.0 * c.gamma == d.beta) f.terms.push_back({c.c / (c.sigma * c.sigma), c.gamma});
    if (f.terms.empty()) {
      d.f.push_back(ZeroDrift{});
    } else if (f.terms.size() == 1) {
      d.f.push_back(f.terms[0]);
    } else {
      d.f.push_back(f);
    }
  }
  return d;
}

inline nlohmann::json local_inputs(const LocalExpansion& e) {
  nlohmann::json in = nlohmann::json::array();
  for (const auto& c : e.coords) {
    in.push_back({{"sigma", c.sigma}, {"b", c.b}, {"beta", c.beta}, {"a", c.a}, {"alpha", c.alpha},
                  {"c", c.c}, {"gamma", c.gamma}, {"h", c.h}});
  }
  return {{"t0", e.t0}, {"T", e.horizon}, {"coords", in}};
}

namespace detail {

// Shared sub / critical / super assembly for the unique-point theorems.
inline void assemble_unique_point(AsymptoticResult& r, double alpha, double scale, double q,
                                  const std::vector<double>& a_eff, const DriftSpec& f,
                                  ConstantsProvider& constants) {
  if (alpha < scale) {
    r.regime = Regime::sub;
    const auto h = constants.pickands({alpha}, a_eff);
    const double integral = drift_integral(f, q, inf());
    r.pickands = h;
    r.drift_integral = integral;
    r.constant = {h.kind, h.value * integral, h.std_error * integral};
  } else if (alpha == scale) {
    r.regime = Regime::critical;
    r.constant = constants.piterbarg({{alpha}, a_eff, f}, q, inf());
  } else {
    r.regime = Regime::super;
    r.constant = ConstantValue::one();
  }
}

inline CdfValue ratio_cdf(double alpha, double scale, const std::vector<double>& a_eff,
                          const DriftSpec& f, double x, ConstantsProvider& constants) {
  if (!(x > 0.0)) throw DomainError("ruin-time CDF: x must be positive");
  CdfValue out;
  if (alpha < scale) {
    out.regime = Regime::sub;
    out.kind = ConstantValue::Kind::closed;
    if (std::isinf(x)) {
      out.value = 1.0;
    } else {
      out.value = std::min(1.0, drift_integral(f, 0.0, x) / drift_integral(f, 0.0, inf()));
    }
  } else if (alpha == scale) {
    out.regime = Regime::critical;
    if (std::isinf(x)) {
      out.value = 1.0;
      return out;
    }
    const PiterbargProblem problem{{alpha}, a_eff, f};
    const auto num = constants.piterbarg(problem, 0.0, x);
    const auto den = constants.piterbarg(problem, 0.0, inf());
    out.kind = (num.kind == ConstantValue::Kind::estimated || den.kind == ConstantValue::Kind::estimated)
                   ? ConstantValue::Kind::estimated
                   : ConstantValue::Kind::closed;
    out.value = num.value / den.value;
    out.std_error = out.value * std::hypot(num.std_error / num.value, den.std_error / den.value);
  } else {
    out.regime = Regime::super;
    out.kind = ConstantValue::Kind::one;
    out.value = 1.0;
  }
  return out;
}

}  // namespace detail

inline AsymptoticResult thm2_asymptotic(const LocalExpansion& e, ConstantsProvider& constants) {
  const auto d = thm2_data(e);
  AsymptoticResult r;
  r.theorem = "thm2";
  r.prefactor_exponent = std::max(0.0, 2.0 / d.alpha - 2.0 / d.beta);
  detail::assemble_unique_point(r, d.alpha, d.beta, d.q, d.a_eff, d.f, constants);
  auto coords = e.coords;
  r.log_tail_product = [coords](double u) {
    std::vector<double> args;
    for (const auto& c : coords) args.push_back((u - c.h) / c.sigma);
    return detail::log_psi_product(args);
  };
  r.inputs = local_inputs(e);
  return r;
}

// Limit of P{(T - tau_u) u^{2/beta} <= x | tau_u <= T}; requires t0 = T.
inline CdfValue corollary1_ruin_time_cdf(const LocalExpansion& e, double x, ConstantsProvider& constants) {
  if (e.t0 != e.horizon) throw DomainError("corollary1: requires t0 = T");
  const auto d = thm2_data(e);
  return detail::ratio_cdf(d.alpha, d.beta, d.a_eff, d.f, x, constants);
}

// ---------------------------------------------------------------------------
// Locally stationary coordinates.

struct StationaryCoord {
  double a = 1.0;      // a_i(t0)
  double alpha = 1.0;
  double c = 0.0;      // h_i(t) = h_m,i - c |t - t0|^gamma (1 + o(1))
  double gamma = 1.0;
  double h_max = 0.0;  // h_m,i
};

struct UniquePoint {
  double t0 = 0.0;
  double horizon = 1.0;
  std::vector<StationaryCoord> coords;
};

struct Plateau {
  double A = 0.0;
  double B = 1.0;
  double horizon = 1.0;
  std::vector<std::function<double(double)>> a;  // a_i(t)
  std::vector<double> alpha;
  std::vector<double> h_max;
};

struct Thm3Data {
  double alpha = 0.0;
  double gamma = 0.0;
  double q = 0.0;
  std::vector<double> a_eff;
  DriftSpec f;
};

inline Thm3Data thm3_data(const UniquePoint& p) {
  if (p.coords.empty()) throw DomainError("thm3: at least one coordinate");
  if (!(p.horizon > 0.0) || !(p.t0 >= 0.0 && p.t0 <= p.horizon)) {
    throw DomainError("thm3: need 0 <= t0 <= T, T > 0");
  }
  Thm3Data d;
  d.alpha = 2.0;
  d.gamma = detail::inf();
  double cmax = 0.0;
  for (std::size_t i = 0; i < p.coords.size(); ++i) {
    const auto& c = p.coords[i];
    const std::string tag = "thm3 coordinate " + std::to_string(i + 1) + ": ";
    if (!(c.a > 0.0)) throw DomainError(tag + "a_i(t0) > 0");
    check_alpha(c.alpha);
    if (!(c.c >= 0.0)) throw DomainError(tag + "c_i >= 0");
    if (c.c > 0.0 && !(c.gamma > 0.0)) throw DomainError(tag + "gamma_i > 0");
    cmax = std::max(cmax, c.c);
    d.alpha = std::min(d.alpha, c.alpha);
    if (c.c != 0.0) d.gamma = std::min(d.gamma, c.gamma);
  }
  if (!(cmax > 0.0)) throw DomainError("thm3: max c_i > 0 required");
  d.q = (p.t0 > 0.0 && p.t0 < p.horizon) ? -detail::inf() : 0.0;
  for (const auto& c : p.coords) {
    d.a_eff.push_back(c.alpha == d.alpha ? c.a : 0.0);
    if (c.c != 0.0 && c.gamma == d.gamma) {
      d.f.push_back(PowerLaw{c.c, d.gamma});
    } else {
      d.f.push_back(ZeroDrift{});
    }
  }
  return d;
}

inline AsymptoticResult thm3_asymptotic(const UniquePoint& p, ConstantsProvider& constants) {
  const auto d = thm3_data(p);
  AsymptoticResult r;
  r.theorem = "thm3";
  r.prefactor_exponent = std::max(0.0, 2.0 / d.alpha - 1.0 / d.gamma);
  detail::assemble_unique_point(r, d.alpha, 2.0 * d.gamma, d.q, d.a_eff, d.f, constants);
  std::vector<double> hm;
  for (const auto& c : p.coords) hm.push_back(c.h_max);
  r.log_tail_product = [hm](double u) {
    std::vector<double> args;
    for (double h : hm) args.push_back(u - h);
    return detail::log_psi_product(args);
  };
  nlohmann::json in = nlohmann::json::array();
  for (const auto& c : p.coords) {
    in.push_back({{"a", c.a}, {"alpha", c.alpha}, {"c", c.c}, {"gamma", c.gamma}, {"h_max", c.h_max}});
  }
  r.inputs = {{"kind", "unique_point"}, {"t0", p.t0}, {"T", p.horizon}, {"coords", in}};
  return r;
}

// Clenshaw-Curtis weights on [-1,1] for the nodes cos(k pi / N), k = 0..N.
inline std::vector<double> clenshaw_curtis_weights(std::size_t N) {
  std::vector<double> w(N + 1, 0.0);
  const double pi = std::numbers::pi;
  for (std::size_t k = 0; k <= N; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j <= N / 2; ++j) {
      const double bj = (j == 0 || 2 * j == N) ? 1.0 : 2.0;
      s += bj / (1.0 - 4.0 * static_cast<double>(j * j)) *
           std::cos(2.0 * static_cast<double>(j * k) * pi / static_cast<double>(N));
    }
    const double ck = (k == 0 || k == N) ? 1.0 : 2.0;
    w[k] = ck / static_cast<double>(N) * s;
  }
  return w;
}

inline constexpr std::size_t kPlateauNodes = 9;

inline AsymptoticResult thm3_plateau_asymptotic(const Plateau& p, ConstantsProvider& constants) {
  const std::size_t n = p.a.size();
  if (n == 0 || p.alpha.size() != n || p.h_max.size() != n) {
    throw DomainError("thm3 plateau: a, alpha and h_max need one entry per coordinate");
  }
  if (!(p.A < p.B)) throw DomainError("thm3 plateau: need A < B");
  if (!(p.A >= 0.0 && p.B <= p.horizon)) throw DomainError("thm3 plateau: need [A,B] inside [0,T]");
  double alpha = 2.0;
  for (double al : p.alpha) {
    check_alpha(al);
    alpha = std::min(alpha, al);
  }
  // H_{alpha, a(t) I} on 9 Chebyshev nodes, integrated by Clenshaw-Curtis,
  // i.e. the exact integral of the degree-8 interpolant.
  const std::size_t N = kPlateauNodes - 1;
  const auto w = clenshaw_curtis_weights(N);
  const double half = 0.5 * (p.B - p.A);
  const double mid = 0.5 * (p.A + p.B);
  double total = 0.0;
  double var = 0.0;
  bool estimated = false;
  for (std::size_t k = 0; k <= N; ++k) {
    const double t = mid + half * std::cos(static_cast<double>(k) * std::numbers::pi / static_cast<double>(N));
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ai = p.a[i](t);
      if (!(ai > 0.0)) throw DomainError("thm3 plateau: a_i(t) must be positive");
      a[i] = p.alpha[i] == alpha ? ai : 0.0;
    }
    const auto h = constants.pickands({alpha}, a);
    estimated = estimated || h.kind == ConstantValue::Kind::estimated;
    total += half * w[k] * h.value;
    var += half * w[k] * half * w[k] * h.std_error * h.std_error;
  }
  AsymptoticResult r;
  r.theorem = "thm3";
  r.regime = Regime::plateau;
  r.prefactor_exponent = 2.0 / alpha;
  r.constant = {estimated ? ConstantValue::Kind::estimated : ConstantValue::Kind::closed, total,
                std::sqrt(var)};
  auto hm = p.h_max;
  r.log_tail_product = [hm](double u) {
    std::vector<double> args;
    for (double h : hm) args.push_back(u - h);
    return detail::log_psi_product(args);
  };
  r.inputs = {{"kind", "plateau"}, {"A", p.A}, {"B", p.B}, {"T", p.horizon}, {"alpha", p.alpha},
              {"h_max", p.h_max}};
  return r;
}

// Limit of P{(T - tau_u) u^{1/gamma} <= x | tau_u <= T}; requires t0 = T.
inline CdfValue corollary2_ruin_time_cdf(const UniquePoint& p, double x, ConstantsProvider& constants) {
  if (p.t0 != p.horizon) throw DomainError("corollary2: requires t0 = T");
  const auto d = thm3_data(p);
  return detail::ratio_cdf(d.alpha, 2.0 * d.gamma, d.a_eff, d.f, x, constants);
}

// ---------------------------------------------------------------------------
// Simultaneous ruin: U_i(t) = u d_i + c_i t - B_{alpha_i}(t) on [0,T].

struct RuinModel {
  std::vector<double> alpha;
  std::vector<double> c;
  std::vector<double> d;
  double horizon = 1.0;

  std::size_t dim() const { return alpha.size(); }
  void validate() const {
    if (alpha.empty()) throw DomainError("ruin model: at least one coordinate");
    if (c.size() != alpha.size() || d.size() != alpha.size()) {
      throw DomainError("ruin model: alpha, c and d lists must have equal length");
    }
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("ruin model: T must be positive");
    for (std::size_t i = 0; i < dim(); ++i) {
      check_alpha(alpha[i]);
      if (!(d[i] > 0.0)) throw DomainError("ruin model: d_i must be positive");
      if (!std::isfinite(c[i])) throw DomainError("ruin model: c_i must be finite");
    }
  }
  double min_alpha() const { return *std::min_element(alpha.begin(), alpha.end()); }
  // theta = sum_i alpha_i d_i^2 / (2 T^{alpha_i + 1}), over all coordinates
  double theta() const {
    double s = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) {
      s += alpha[i] * d[i] * d[i] / (2.0 * std::pow(horizon, alpha[i] + 1.0));
    }
    return s;
  }
  // b_i = d_i^2 / (2 T^{2 alpha_i}), zeroed where alpha_i > min alpha
  std::vector<double> b_eff() const {
    const double al = min_alpha();
    std::vector<double> b(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
      b[i] = alpha[i] == al ? d[i] * d[i] / (2.0 * std::pow(horizon, 2.0 * alpha[i])) : 0.0;
    }
    return b;
  }
  DriftSpec drift() const {
    DriftSpec f;
    for (std::size_t i = 0; i < dim(); ++i) {
      f.push_back(LinearPositive{alpha[i] * d[i] * d[i] / (2.0 * std::pow(horizon, alpha[i] + 1.0))});
    }
    return f;
  }
};

// The same model as a unique-maximum local expansion at t0 = T: coordinate i
// is B_{alpha_i}(t)/d_i with trend -c_i t / d_i.
inline LocalExpansion prop1_local_expansion(const RuinModel& m) {
  m.validate();
  LocalExpansion e;
  e.t0 = m.horizon;
  e.horizon = m.horizon;
  const double T = m.horizon;
  for (std::size_t i = 0; i < m.dim(); ++i) {
    const double al = m.alpha[i];
    LocalCoord c;
    c.sigma = std::pow(T, al / 2.0) / m.d[i];
    c.b = al * std::pow(T, al / 2.0 - 1.0) / (2.0 * m.d[i]);
    c.beta = 1.0;
    c.a = 1.0 / (2.0 * std::pow(T, al));
    c.alpha = al;
    c.c = -m.c[i] / m.d[i];
    c.gamma = 1.0;
    c.h = -m.c[i] * T / m.d[i];
    e.coords.push_back(c);
  }
  return e;
}

inline AsymptoticResult prop1_ruin_asymptotic(const RuinModel& m, ConstantsProvider& constants) {
  m.validate();
  const double al = m.min_alpha();
  AsymptoticResult r;
  r.theorem = "prop1";
  r.prefactor_exponent = std::max(0.0, 2.0 / al - 2.0);
  if (al < 1.0) {
    r.regime = Regime::sub;
    const auto h = constants.pickands({al}, m.b_eff());
    const double inv = 1.0 / m.theta();
    r.pickands = h;
    r.drift_integral = inv;
    r.constant = {h.kind, h.value * inv, h.std_error * inv};
  } else if (al == 1.0) {
    r.regime = Regime::critical;
    r.constant = constants.piterbarg({{al}, m.b_eff(), m.drift()}, 0.0, detail::inf());
  } else {
    r.regime = Regime::super;
    r.constant = ConstantValue::one();
  }
  r.log_tail_product = [m](double u) {
    std::vector<double> args;
    for (std::size_t i = 0; i < m.dim(); ++i) {
      args.push_back((m.d[i] * u + m.c[i] * m.horizon) / std::pow(m.horizon, m.alpha[i] / 2.0));
    }
    return detail::log_psi_product(args);
  };
  r.inputs = {{"alpha", m.alpha}, {"c", m.c}, {"d", m.d}, {"T", m.horizon}};
  return r;
}

// Limit of P{(T - tau_u) u^2 <= x | tau_u <= T}.
inline CdfValue prop1_ruin_time_cdf(const RuinModel& m, double x, ConstantsProvider& constants) {
  m.validate();
  if (!(x > 0.0)) throw DomainError("ruin-time CDF: x must be positive");
  const double al = m.min_alpha();
  CdfValue out;
  if (al < 1.0) {
    out.regime = Regime::sub;
    out.kind = ConstantValue::Kind::closed;
    out.value = std::isinf(x) ? 1.0 : -std::expm1(-m.theta() * x);
    return out;
  }
  if (al > 1.0) {
    out.regime = Regime::super;
    out.kind = ConstantValue::Kind::one;
    out.value = 1.0;
    return out;
  }
  return detail::ratio_cdf(1.0, 1.0, m.b_eff(), m.drift(), x, constants);
}

}  // namespace vecext
