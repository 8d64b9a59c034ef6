// vecext: command-line front end.
//
//   vecext constant  --kind pickands|piterbarg --alpha .. --a .. [--drift ..] [--interval S1,S2] ...
//   vecext ruin      --alpha-list .. --d-list .. --c-list .. --T 1 --u-list .. --mode asymptotic|mc|compare
//   vecext ruin-time --alpha-list .. --d-list .. --c-list .. --T 1 --u 3 --x-grid .. [--scaling 2]
//   vecext paths     --alpha-list .. [--d-list ..] [--c-list ..] --T 1 --grid 1024
//   vecext tabulate  (--requests file.json | --kind .. --alpha .. --a .. --interval ..) [--cache dir]
//   vecext verify    --suite fast|full
//
// Every subcommand accepts --config FILE (flat key = value, keys are the long
// option names; command-line flags win) and --save-config FILE.
// Exit codes: 0 success, 1 usage, 2 non-convergence or no events.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vecext/acceptance.hpp"
#include "vecext/asymptotics.hpp"
#include "vecext/cli_config.hpp"
#include "vecext/constants.hpp"
#include "vecext/exceedance.hpp"
#include "vecext/gauss_paths.hpp"
#include "vecext/tabulate.hpp"

using namespace vecext;
using cli::UsageError;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kNumerical = 2;

// Raised for exit status 2 after the artifact (if any) has been written.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
  unsigned threads = 0;
  std::string config;
  std::string save_config;
};

void add_common(CLI::App* sub, Common& c, const std::string& default_format) {
  c.format = default_format;
  sub->add_option("--seed", c.seed, "master seed")->capture_default_str();
  sub->add_option("--out", c.out, "output file (default: stdout)");
  sub->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  sub->add_option("--threads", c.threads, "worker threads (0: all cores); never changes results");
  sub->add_option("--config", c.config, "key = value experiment file; flags win");
  sub->add_option("--save-config", c.save_config, "write the effective configuration to this file");
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty() || c.out == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(c.out);
  if (!f) throw UsageError("cannot write " + c.out);
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

std::vector<double> require_list(const std::string& text, const std::string& flag) {
  if (cli::trim(text).empty()) throw UsageError(flag + " is required");
  return cli::parse_list(text, flag);
}

DriftSpec parse_drifts(const std::string& text, std::size_t n) {
  DriftSpec d;
  for (const auto& item : cli::split(text, ",|")) d.push_back(parse_drift(item));
  if (d.size() == 1 && n > 1) d.assign(n, d[0]);
  if (!d.empty() && d.size() != n) throw UsageError("--drift: need 1 or " + std::to_string(n) + " entries");
  return d;
}

std::pair<double, double> parse_interval(const std::string& text) {
  const auto v = cli::parse_list(text, "--interval");
  if (v.size() != 2) throw UsageError("--interval takes S1,S2");
  return {v[0], v[1]};
}

std::string csv_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream o;
  o.precision(17);
  o << v;
  return o.str();
}

// ---------------------------------------------------------------------------
// constant

struct ConstantArgs {
  Common common;
  std::string kind;
  std::string alpha, a, drift, interval = "0,inf", horizons = "8,16,32,64";
  double delta = 0.0;
  std::uint64_t reps = 100000;
  std::size_t batches = 50;
  double initial_horizon = 4.0;
  std::size_t max_rungs = 6;
  double rel_tol = -1.0;
};

void setup_constant(CLI::App& app, ConstantArgs& a) {
  auto* s = app.add_subcommand("constant", "estimate a Pickands or Piterbarg constant");
  s->add_option("--kind", a.kind, "pickands or piterbarg")->check(CLI::IsMember({"pickands", "piterbarg"}));
  s->add_option("--alpha", a.alpha, "alpha_i, comma-separated (1 entry broadcasts)");
  s->add_option("--a", a.a, "a_i, comma-separated");
  s->add_option("--drift", a.drift, "per-coordinate drifts: zero, pow(c;g), lin(c), sums of pow");
  s->add_option("--interval", a.interval, "S1,S2 with inf allowed, e.g. 0,inf or -inf,inf")->capture_default_str();
  s->add_option("--horizons", a.horizons, "Pickands horizon ladder")->capture_default_str();
  s->add_option("--delta", a.delta, "lattice step (0: default)");
  s->add_option("--reps", a.reps, "replicates")->capture_default_str();
  s->add_option("--batches", a.batches, "batches for the standard error")->capture_default_str();
  s->add_option("--initial-horizon", a.initial_horizon, "first truncation for infinite ends")->capture_default_str();
  s->add_option("--max-rungs", a.max_rungs, "horizon doublings for infinite ends")->capture_default_str();
  s->add_option("--rel-tol", a.rel_tol, "ladder tolerance (default: 0.1 pickands, 0.02 limits)");
  add_common(s, a.common, "json");
}

std::string constant_csv(const ConstantEstimate& e) {
  std::ostringstream o;
  o << "kind,method,value,stderr,delta,S1,S2,R,seed,alpha,a,drift\n";
  o.precision(17);
  auto list = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + csv_number(v[i]);
    return s;
  };
  o << e.kind << ',' << e.method << ',' << e.value << ',' << e.std_error << ',' << e.delta << ','
    << csv_number(e.s1) << ',' << csv_number(e.s2) << ',' << e.replicates << ',' << e.seed << ",\"" << list(e.alpha)
    << "\",\"" << list(e.a) << "\",\"" << e.drift << "\"\n";
  return o.str();
}

int run_constant(const ConstantArgs& a) {
  if (a.kind.empty()) throw UsageError("--kind is required");
  const auto alpha = require_list(a.alpha, "--alpha");
  const auto coef = require_list(a.a, "--a");
  auto write = [&](const ConstantEstimate& e, bool converged) {
    if (a.common.format == "csv") {
      emit(a.common, constant_csv(e));
    } else {
      auto j = to_json(e);
      j["converged"] = converged;
      emit(a.common, j.dump(2));
    }
  };
  try {
    ConstantEstimate est;
    if (a.kind == "pickands") {
      if (!cli::trim(a.drift).empty()) throw UsageError("--drift does not apply to pickands");
      PickandsOptions po;
      po.estimator.delta = a.delta;
      po.estimator.replicates = a.reps;
      po.estimator.batches = a.batches;
      po.estimator.threads = a.common.threads;
      po.estimator.rng = {a.common.seed, 0};
      po.horizons = cli::parse_list(a.horizons, "--horizons");
      if (a.rel_tol >= 0.0) po.rel_tol = a.rel_tol;
      est = pickands_estimate(alpha, coef, po);
    } else {
      const auto [s1, s2] = parse_interval(a.interval);
      LimitOptions lo;
      lo.estimator.delta = a.delta;
      lo.estimator.replicates = a.reps;
      lo.estimator.batches = a.batches;
      lo.estimator.threads = a.common.threads;
      lo.estimator.rng = {a.common.seed, 0};
      lo.initial_horizon = a.initial_horizon;
      lo.max_rungs = a.max_rungs;
      if (a.rel_tol >= 0.0) lo.rel_tol = a.rel_tol;
      const PiterbargProblem problem{alpha, coef, parse_drifts(a.drift, coef.size())};
      est = piterbarg_interval(problem, s1, s2, lo);
    }
    write(est, true);
    return kOk;
  } catch (const ConvergenceError& e) {
    write(e.partial(), false);
    throw NumericalFailure(e.what());
  }
}

// ---------------------------------------------------------------------------
// ruin / ruin-time / paths share the model flags

struct ModelArgs {
  std::string alpha, d, c;
  double horizon = 1.0;
};

void add_model(CLI::App* s, ModelArgs& m, bool lists_optional = false) {
  s->add_option("--alpha-list", m.alpha, "alpha_i, comma-separated");
  s->add_option("--d-list", m.d, lists_optional ? "d_i (default 1)" : "d_i, comma-separated");
  s->add_option("--c-list", m.c, lists_optional ? "c_i (default 0)" : "c_i, comma-separated");
  s->add_option("--T", m.horizon, "horizon T")->capture_default_str();
}

RuinModel build_model(const ModelArgs& m, bool lists_optional = false) {
  RuinModel model;
  model.alpha = require_list(m.alpha, "--alpha-list");
  const std::size_t n = model.alpha.size();
  if (lists_optional && cli::trim(m.d).empty()) {
    model.d.assign(n, 1.0);
  } else {
    model.d = require_list(m.d, "--d-list");
  }
  if (lists_optional && cli::trim(m.c).empty()) {
    model.c.assign(n, 0.0);
  } else {
    model.c = require_list(m.c, "--c-list");
  }
  if (model.d.size() != n || model.c.size() != n) {
    throw UsageError("--alpha-list, --d-list and --c-list must have the same length");
  }
  try {
    model.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  return model;
}

// Constants for asymptotic predictions come from their own fixed seed, so the
// asymptotic column never depends on --seed.
struct ConstantArgsLite {
  std::uint64_t seed = 0;
  std::uint64_t reps = 100000;
  std::string horizons = "8,16,32,64";
  double rel_tol = 0.1;
};

void add_constant_flags(CLI::App* s, ConstantArgsLite& c) {
  s->add_option("--constant-seed", c.seed, "seed for Monte Carlo constants")->capture_default_str();
  s->add_option("--constant-reps", c.reps, "replicates for Monte Carlo constants")->capture_default_str();
  s->add_option("--constant-horizons", c.horizons, "Pickands horizon ladder")->capture_default_str();
  s->add_option("--constant-rel-tol", c.rel_tol, "Pickands slope-check tolerance")->capture_default_str();
}

MonteCarloConstants make_constants(const ConstantArgsLite& c, unsigned threads) {
  MonteCarloConstants::Options o;
  o.pickands.estimator.replicates = c.reps;
  o.pickands.estimator.rng = {c.seed, 0};
  o.pickands.estimator.threads = threads;
  o.pickands.horizons = cli::parse_list(c.horizons, "--constant-horizons");
  o.pickands.rel_tol = c.rel_tol;
  o.piterbarg.estimator.replicates = c.reps;
  o.piterbarg.estimator.rng = {c.seed, 1};
  o.piterbarg.estimator.threads = threads;
  return MonteCarloConstants(o);
}

struct RuinArgs {
  Common common;
  ModelArgs model;
  std::string u_list;
  std::string mode = "compare";
  std::uint64_t reps = 1000000;
  std::size_t grid = std::size_t{1} << 14;
  ConstantArgsLite constants;
};

void setup_ruin(CLI::App& app, RuinArgs& a) {
  auto* s = app.add_subcommand("ruin", "simultaneous ruin probability: asymptotic, Monte Carlo, or both");
  add_model(s, a.model);
  s->add_option("--u-list", a.u_list, "thresholds u, comma-separated");
  s->add_option("--mode", a.mode, "asymptotic, mc or compare")
      ->check(CLI::IsMember({"asymptotic", "mc", "compare"}))
      ->capture_default_str();
  s->add_option("--reps", a.reps, "Monte Carlo replicates")->capture_default_str();
  s->add_option("--grid", a.grid, "grid steps m on [0,T]")->capture_default_str();
  add_constant_flags(s, a.constants);
  add_common(s, a.common, "csv");
}

int run_ruin(const RuinArgs& a) {
  const auto model = build_model(a.model);
  const auto us = require_list(a.u_list, "--u-list");
  const bool want_asym = a.mode != "mc";
  const bool want_mc = a.mode != "asymptotic";

  std::optional<AsymptoticResult> pred;
  if (want_asym) {
    auto constants = make_constants(a.constants, a.common.threads);
    try {
      pred = prop1_ruin_asymptotic(model, constants);
    } catch (const ConvergenceError& e) {
      throw NumericalFailure(std::string("asymptotic constant: ") + e.what());
    }
  }
  std::vector<ExceedanceEstimate> mc;
  if (want_mc) {
    ExceedanceOptions eo;
    eo.m = a.grid;
    eo.replicates = a.reps;
    eo.threads = a.common.threads;
    eo.rng = {a.common.seed, 0};
    mc = estimate_ruin(model, us, eo);
  }

  std::vector<ComparisonRow> rows;
  for (std::size_t k = 0; k < us.size(); ++k) {
    ComparisonRow r;
    r.u = us[k];
    if (want_mc && want_asym) {
      r = compare_asymptotic(mc[k], *pred, us[k]);
    } else if (want_mc) {
      r.mc = mc[k].probability;
      r.mc_std_error = mc[k].std_error;
    } else {
      r.asymptotic = pred->value(us[k]);
      r.asymptotic_std_error = pred->std_error(us[k]);
    }
    rows.push_back(r);
  }

  if (a.common.format == "csv") {
    std::ostringstream o;
    o.precision(10);
    o << "u";
    if (want_asym) o << ",asymptotic,asymptotic_stderr";
    if (want_mc) o << ",mc,mc_stderr,hits";
    if (want_asym && want_mc) o << ",ratio,ratio_stderr";
    o << '\n';
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& r = rows[k];
      o << r.u;
      if (want_asym) o << ',' << r.asymptotic << ',' << r.asymptotic_std_error;
      if (want_mc) o << ',' << r.mc << ',' << r.mc_std_error << ',' << mc[k].hits;
      if (want_asym && want_mc) o << ',' << r.ratio << ',' << r.ratio_std_error;
      o << '\n';
    }
    emit(a.common, o.str());
  } else {
    json j{{"model", model_json(model)}, {"mode", a.mode}};
    if (pred) j["asymptotic"] = to_json(*pred, us);
    if (want_mc) {
      j["mc"] = json::array();
      for (const auto& e : mc) j["mc"].push_back(to_json(e));
      j["seed"] = a.common.seed;
    }
    if (want_mc && want_asym) {
      j["comparison"] = to_json(compare_ladder(mc, *pred));
    }
    emit(a.common, j.dump(2));
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// ruin-time

struct RuinTimeArgs {
  Common common;
  ModelArgs model;
  double u = 0.0;
  std::string x_grid;
  double scaling = 2.0;
  std::uint64_t reps = 1000000;
  std::size_t grid = 512;
  ConstantArgsLite constants;
};

void setup_ruin_time(CLI::App& app, RuinTimeArgs& a) {
  auto* s = app.add_subcommand("ruin-time", "conditional law of the scaled ruin time (T - tau_u) u^s");
  add_model(s, a.model);
  s->add_option("--u", a.u, "threshold u");
  s->add_option("--x-grid", a.x_grid, "x values for the CDF table (sorted internally)");
  s->add_option("--scaling", a.scaling, "exponent s (> 0)")->capture_default_str();
  s->add_option("--reps", a.reps, "Monte Carlo replicates")->capture_default_str();
  s->add_option("--grid", a.grid, "grid steps m on [0,T]")->capture_default_str();
  add_constant_flags(s, a.constants);
  add_common(s, a.common, "csv");
}

int run_ruin_time(const RuinTimeArgs& a) {
  const auto model = build_model(a.model);
  auto xs = require_list(a.x_grid, "--x-grid");
  std::sort(xs.begin(), xs.end());
  for (double x : xs) {
    if (!(x > 0.0)) throw UsageError("--x-grid values must be positive");
  }
  if (!(a.scaling > 0.0)) throw UsageError("--scaling must be positive");
  ExceedanceOptions eo;
  eo.m = a.grid;
  eo.replicates = a.reps;
  eo.threads = a.common.threads;
  eo.rng = {a.common.seed, 0};
  const auto sample = sample_ruin_time(model, a.u, a.scaling, eo);
  if (sample.empty()) throw NumericalFailure("no ruin events at this u");

  auto constants = make_constants(a.constants, a.common.threads);
  std::vector<double> lim;
  Regime regime = Regime::sub;
  try {
    for (double x : xs) {
      const auto v = prop1_ruin_time_cdf(model, x, constants);
      lim.push_back(v.value);
      regime = v.regime;
    }
  } catch (const ConvergenceError& e) {
    throw NumericalFailure(std::string("limiting CDF constant: ") + e.what());
  }
  std::vector<double> sorted = sample.values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> emp;
  double ks_grid = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    emp.push_back(empirical_cdf(sorted, xs[k]));
    ks_grid = std::max(ks_grid, std::fabs(emp.back() - lim[k]));
  }
  // Closed-form limit (alpha < 1): the full Kolmogorov-Smirnov distance.
  std::optional<double> ks_full;
  if (regime == Regime::sub) {
    const double theta = model.theta();
    ks_full = ks_distance(sample.values, [theta](double x) { return -std::expm1(-theta * x); });
  }
  const double ks = ks_full.value_or(ks_grid);

  if (a.common.format == "csv") {
    std::ostringstream o;
    o.precision(10);
    o << "x,empirical_cdf,limiting_cdf\n";
    for (std::size_t k = 0; k < xs.size(); ++k) o << xs[k] << ',' << emp[k] << ',' << lim[k] << '\n';
    o << "KS," << ks << ',' << (ks_full ? "full" : "grid") << '\n';
    emit(a.common, o.str());
  } else {
    json rows = json::array();
    for (std::size_t k = 0; k < xs.size(); ++k) {
      rows.push_back({{"x", xs[k]}, {"empirical_cdf", emp[k]}, {"limiting_cdf", lim[k]}});
    }
    emit(a.common, json{{"model", model_json(model)},
                        {"u", a.u},
                        {"scaling", a.scaling},
                        {"regime", to_string(regime)},
                        {"hits", sample.values.size()},
                        {"replicates", sample.replicates},
                        {"grid", sample.grid},
                        {"seed", a.common.seed},
                        {"rows", rows},
                        {"ks", ks},
                        {"ks_over", ks_full ? "full" : "grid"}}
                       .dump(2));
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// paths

struct PathArgs {
  Common common;
  ModelArgs model;
  std::size_t grid = 1024;
  bool trend = true;
};

void setup_paths(CLI::App& app, PathArgs& a) {
  auto* s = app.add_subcommand("paths", "sample one path of B_alpha_i(t)/d_i - c_i t / d_i on a grid");
  add_model(s, a.model, true);
  s->add_option("--grid", a.grid, "grid steps m")->capture_default_str();
  s->add_option("--trend", a.trend, "include the trend -c_i t/d_i")->capture_default_str();
  add_common(s, a.common, "csv");
}

int run_paths(const PathArgs& a) {
  const auto model = build_model(a.model, true);
  const auto path = sample_vector(ruin_process_spec(model), a.grid, {a.common.seed, 0}, a.trend);
  if (a.common.format == "csv") {
    std::ostringstream o;
    write_csv(o, path);
    emit(a.common, o.str());
  } else {
    emit(a.common, json{{"times", path.times}, {"values", path.values}, {"seed", a.common.seed}}.dump());
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// tabulate

struct TabulateArgs {
  Common common;
  std::string requests;
  std::string cache;
  std::string kind = "piterbarg";
  std::string alpha, a, drift, interval = "0,1";
  double delta = 0.0;
  std::uint64_t reps = 100000;
};

void setup_tabulate(CLI::App& app, TabulateArgs& a) {
  auto* s = app.add_subcommand("tabulate", "tabulate constants through the persistent cache");
  s->add_option("--requests", a.requests, "JSON array of {kind, alpha, a, drift, S1, S2, delta, R, seed}");
  s->add_option("--cache", a.cache, "cache directory (default: $VECEXT_CACHE_DIR or .vecext-cache)");
  s->add_option("--kind", a.kind, "single request: pickands or piterbarg")->capture_default_str();
  s->add_option("--alpha", a.alpha, "single request: alpha_i");
  s->add_option("--a", a.a, "single request: a_i");
  s->add_option("--drift", a.drift, "single request: drifts");
  s->add_option("--interval", a.interval, "single request: finite S1,S2 (pickands: 0,T)")->capture_default_str();
  s->add_option("--delta", a.delta, "single request: lattice step")->capture_default_str();
  s->add_option("--reps", a.reps, "single request: replicates")->capture_default_str();
  add_common(s, a.common, "csv");
}

int run_tabulate(const TabulateArgs& a) {
  std::vector<TabulationRequest> reqs;
  if (!a.requests.empty()) {
    std::ifstream in(a.requests);
    if (!in) throw UsageError("cannot read " + a.requests);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw UsageError(std::string("bad requests file: ") + e.what());
    }
    for (const auto& r : doc) {
      TabulationRequest q;
      q.kind = r.value("kind", "piterbarg");
      q.alpha = r.at("alpha").get<std::vector<double>>();
      q.a = r.at("a").get<std::vector<double>>();
      if (r.contains("drift")) {
        const auto text = r.at("drift").get<std::string>();
        q.drift = parse_drifts(text, q.a.size());
      }
      q.s1 = r.value("S1", 0.0);
      q.s2 = r.value("S2", 1.0);
      q.delta = r.value("delta", 0.0);
      q.replicates = r.value("R", std::uint64_t{100000});
      q.seed = r.value("seed", a.common.seed);
      reqs.push_back(q);
    }
  } else {
    TabulationRequest q;
    q.kind = a.kind;
    q.alpha = require_list(a.alpha, "--alpha");
    q.a = require_list(a.a, "--a");
    q.drift = parse_drifts(a.drift, q.a.size());
    std::tie(q.s1, q.s2) = parse_interval(a.interval);
    if (!std::isfinite(q.s1) || !std::isfinite(q.s2)) throw UsageError("tabulate takes finite intervals");
    q.delta = a.delta;
    q.replicates = a.reps;
    q.seed = a.common.seed;
    reqs.push_back(q);
  }
  const ConstantCache cache(a.cache.empty() ? default_cache_dir() : a.cache);
  std::vector<TableRow> rows;
  try {
    rows = tabulate(reqs, cache, a.common.threads);
  } catch (const ConvergenceError& e) {
    throw NumericalFailure(e.what());
  }
  if (a.common.format == "csv") {
    std::ostringstream o;
    write_table_csv(o, rows);
    emit(a.common, o.str());
  } else {
    json j = json::array();
    for (const auto& r : rows) {
      auto e = to_json(r.estimate);
      e["from_cache"] = r.from_cache;
      j.push_back(e);
    }
    emit(a.common, j.dump(2));
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  Common common;
  std::string suite = "fast";
  std::string fault = "none";
  std::string allow_red;
  std::string only;
};

void setup_verify(CLI::App& app, VerifyArgs& a) {
  auto* s = app.add_subcommand("verify", "run the acceptance criteria");
  s->add_option("--suite", a.suite, "fast or full")->check(CLI::IsMember({"fast", "full"}))->capture_default_str();
  s->add_option("--inject-fault", a.fault, "none or covariance (self-test of the harness)")
      ->check(CLI::IsMember({"none", "covariance"}))
      ->capture_default_str();
  s->add_option("--allow-red", a.allow_red, "criteria whose failure does not change the exit status");
  s->add_option("--only", a.only, "run only these criteria");
  add_common(s, a.common, "json");
}

std::set<int> parse_ids(const std::string& text, const std::string& flag) {
  std::set<int> out;
  for (double v : cli::parse_list(text, flag)) {
    if (v != std::floor(v) || v < 1 || v > 9) throw UsageError(flag + ": criteria are numbered 1..9");
    out.insert(static_cast<int>(v));
  }
  return out;
}

int run_verify(const VerifyArgs& a, bool seed_given) {
  acceptance::Config cfg;
  cfg.suite = a.suite == "full" ? acceptance::Suite::full : acceptance::Suite::fast;
  if (seed_given) cfg.seed = a.common.seed;
  cfg.threads = a.common.threads;
  cfg.fault = a.fault == "covariance" ? acceptance::Fault::covariance : acceptance::Fault::none;
  cfg.allow_red = parse_ids(a.allow_red, "--allow-red");
  cfg.only = parse_ids(a.only, "--only");
  cfg.log = &std::cerr;
  const auto summary = acceptance::run(cfg, std::cerr);
  emit(a.common, acceptance::to_json(summary, cfg).dump(2));
  const int code = acceptance::exit_code(summary, cfg);
  if (code != 0) {
    std::string ids;
    for (const auto& r : summary.results) {
      if (!r.passed && !cfg.allow_red.count(r.id)) ids += (ids.empty() ? "" : ", ") + std::to_string(r.id);
    }
    std::cerr << "verify: failed criteria: " << ids << '\n';
  }
  return code;
}

// ---------------------------------------------------------------------------

std::set<std::string> long_names(const CLI::App* sub) {
  std::set<std::string> out;
  for (const auto* opt : sub->get_options()) {
    for (const auto& name : opt->get_lnames()) out.insert(name);
  }
  out.erase("help");
  out.erase("config");
  out.erase("save-config");
  return out;
}

void save_config(const CLI::App* sub, const std::string& path) {
  cli::ConfigEntries entries;
  for (const auto* opt : sub->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const auto& name = opt->get_lnames().front();
    if (name == "help" || name == "config" || name == "save-config" || opt->count() == 0) continue;
    std::string value;
    for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    entries.emplace_back(name, value);
  }
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write " + path);
  f << cli::write_config(entries);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vecext: vector-valued Gaussian extremes, constants and simultaneous ruin", "vecext"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");
  ConstantArgs constant;
  RuinArgs ruin;
  RuinTimeArgs ruin_time;
  PathArgs paths;
  TabulateArgs tab;
  VerifyArgs verify;
  setup_constant(app, constant);
  setup_ruin(app, ruin);
  setup_ruin_time(app, ruin_time);
  setup_paths(app, paths);
  setup_tabulate(app, tab);
  setup_verify(app, verify);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    // Fold a --config file into the arguments before parsing.
    std::string config_path;
    std::size_t sub_pos = args.size();
    for (std::size_t k = 0; k < args.size(); ++k) {
      if (sub_pos == args.size() && args[k].rfind("-", 0) != 0) sub_pos = k;
      if (args[k] == "--config" && k + 1 < args.size()) config_path = args[k + 1];
      if (args[k].rfind("--config=", 0) == 0) config_path = args[k].substr(9);
    }
    if (!config_path.empty() && sub_pos < args.size()) {
      const auto* sub = app.get_subcommand_no_throw(args[sub_pos]);
      if (!sub) throw UsageError("unknown subcommand '" + args[sub_pos] + "'");
      args = cli::merge_config(args, sub_pos + 1, cli::read_config(config_path), long_names(sub));
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n(see vecext --help)\n";
    return kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::map<std::string, Common*> commons{{"constant", &constant.common}, {"ruin", &ruin.common},
                                               {"ruin-time", &ruin_time.common}, {"paths", &paths.common},
                                               {"tabulate", &tab.common}, {"verify", &verify.common}};
  try {
    const Common& common = *commons.at(sub->get_name());
    if (!common.save_config.empty()) save_config(sub, common.save_config);
    const std::string name = sub->get_name();
    if (name == "constant") return run_constant(constant);
    if (name == "ruin") return run_ruin(ruin);
    if (name == "ruin-time") return run_ruin_time(ruin_time);
    if (name == "paths") return run_paths(paths);
    if (name == "tabulate") return run_tabulate(tab);
    return run_verify(verify, sub->get_option("--seed")->count() > 0);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << sub->help() << '\n';
    return kUsage;
  } catch (const NumericalFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
}
