#pragma once

// Persistent tabulation of constants: one JSON document per entry in a
// content-addressed directory, CSV export.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vecext/constants.hpp"

namespace vecext {

inline constexpr int kCacheSchemaVersion = 1;

struct TabulationRequest {
  std::string kind = "piterbarg";  // piterbarg | pickands
  std::vector<double> alpha;
  std::vector<double> a;
  DriftSpec drift;  // must be expressible by drift_id / parse_drift (no user callables)
  double s1 = 0.0;
  double s2 = 1.0;  // pickands: top horizon
  double delta = 0.0;
  std::uint64_t replicates = 100000;
  std::uint64_t seed = 0;
};

inline std::string default_cache_dir() {
  if (const char* env = std::getenv("VECEXT_CACHE_DIR")) return env;
  return ".vecext-cache";
}

namespace detail {

inline std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// Canonical JSON of the inputs that determine an entry.
inline nlohmann::json canonical_key(const TabulationRequest& req) {
  DriftSpec d = req.drift;
  if (d.empty()) d.assign(req.a.size(), ZeroDrift{});
  for (const auto& item : d) {
    if (std::holds_alternative<UserDrift>(item)) {
      throw DomainError("tabulate: user drifts cannot be cached");
    }
  }
  const double delta = req.delta > 0.0 ? req.delta
                       : req.kind == "pickands" ? std::ldexp(1.0, -8)
                                                : default_delta(req.s1, req.s2);
  return {{"schema", kCacheSchemaVersion}, {"kind", req.kind},     {"alpha", req.alpha},
          {"a", req.a},                    {"drift", drift_id(d)}, {"S1", req.s1},
          {"S2", req.s2},                  {"delta", delta},       {"R", req.replicates},
          {"seed", req.seed}};
}

inline std::string cache_key(const TabulationRequest& req) {
  return detail::hex64(detail::fnv1a(canonical_key(req).dump()));
}

struct TableRow {
  TabulationRequest request;
  ConstantEstimate estimate;
  bool from_cache = false;
};

// Serialized computation: fn computes an estimate for a request.
class ConstantCache {
 public:
  explicit ConstantCache(std::filesystem::path dir, std::ostream* warnings = &std::cerr)
      : dir_(std::move(dir)), warnings_(warnings) {}

  const std::filesystem::path& directory() const { return dir_; }

  std::filesystem::path entry_path(const TabulationRequest& req) const {
    return dir_ / (cache_key(req) + ".json");
  }

  // Returns the cached estimate, or nullopt when missing, stale or corrupt.
  std::optional<ConstantEstimate> load(const TabulationRequest& req) const {
    const auto path = entry_path(req);
    if (!std::filesystem::exists(path)) return std::nullopt;
    try {
      std::ifstream in(path);
      const auto doc = nlohmann::json::parse(in);
      if (doc.at("schema").get<int>() != kCacheSchemaVersion) {
        warn("stale cache schema in " + path.string() + ", recomputing");
        return std::nullopt;
      }
      if (doc.at("key") != canonical_key(req)) {
        warn("cache key collision in " + path.string() + ", recomputing");
        return std::nullopt;
      }
      return from_json(doc.at("estimate"));
    } catch (const std::exception& e) {
      warn("corrupt cache entry " + path.string() + " (" + e.what() + "), recomputing");
      return std::nullopt;
    }
  }

  void store(const TabulationRequest& req, const ConstantEstimate& est) const {
    std::lock_guard lock(mutex());
    std::filesystem::create_directories(dir_);
    const auto path = entry_path(req);
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp);
      nlohmann::json doc{{"schema", kCacheSchemaVersion}, {"key", canonical_key(req)},
                         {"estimate", to_json(est)}};
      out << doc.dump(2) << '\n';
      if (!out) throw std::runtime_error("cannot write cache entry " + tmp);
    }
    std::filesystem::rename(tmp, path);
  }

  static ConstantEstimate from_json(const nlohmann::json& j) {
    auto num = [](const nlohmann::json& v) {
      if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw std::runtime_error("bad number " + s);
      }
      return v.get<double>();
    };
    ConstantEstimate e;
    e.kind = j.at("kind").get<std::string>();
    e.method = j.at("method").get<std::string>();
    e.value = j.at("value").get<double>();
    e.std_error = j.at("std_error").get<double>();
    e.delta = j.at("delta").get<double>();
    e.s1 = num(j.at("S1"));
    e.s2 = num(j.at("S2"));
    e.replicates = j.at("replicates").get<std::uint64_t>();
    e.batches = j.at("batches").get<std::size_t>();
    e.alpha = j.at("alpha").get<std::vector<double>>();
    e.a = j.at("a").get<std::vector<double>>();
    e.drift = j.at("drift").get<std::string>();
    e.seed = j.at("seed").get<std::uint64_t>();
    e.coercive = j.value("coercive", true);
    for (const auto& r : j.at("ladder")) {
      e.ladder.push_back({r.at("S1").get<double>(), r.at("S2").get<double>(),
                          r.at("value").get<double>(), r.at("std_error").get<double>()});
    }
    if (j.contains("slope")) e.slope = j.at("slope").get<double>();
    if (j.contains("slope_std_error")) e.slope_std_error = j.at("slope_std_error").get<double>();
    return e;
  }

 private:
  void warn(const std::string& msg) const {
    if (warnings_) *warnings_ << "warning: " << msg << '\n';
  }
  static std::mutex& mutex() {
    static std::mutex m;
    return m;
  }

  std::filesystem::path dir_;
  std::ostream* warnings_;
};

inline ConstantEstimate compute_entry(const TabulationRequest& req, unsigned threads = 0) {
  if (req.kind == "pickands") {
    PickandsOptions opt;
    opt.estimator.delta = req.delta;
    opt.estimator.replicates = req.replicates;
    opt.estimator.rng = {req.seed, 0};
    opt.estimator.threads = threads;
    std::vector<double> ladder;
    for (double h = req.s2; h >= 8.0 && ladder.size() < 4; h /= 2.0) ladder.insert(ladder.begin(), h);
    if (ladder.empty()) ladder.push_back(req.s2);
    opt.horizons = ladder;
    return pickands_estimate(req.alpha, req.a, opt);
  }
  if (req.kind != "piterbarg") throw DomainError("tabulate: unknown kind '" + req.kind + "'");
  EstimatorOptions opt;
  opt.delta = req.delta;
  opt.replicates = req.replicates;
  opt.rng = {req.seed, 0};
  opt.threads = threads;
  return piterbarg_estimate({req.alpha, req.a, req.drift}, req.s1, req.s2, opt);
}

// Computes missing entries, reuses cached ones.
inline std::vector<TableRow> tabulate(const std::vector<TabulationRequest>& requests,
                                      const ConstantCache& cache, unsigned threads = 0) {
  std::vector<TableRow> rows;
  for (const auto& req : requests) {
    TableRow row{req, {}, false};
    if (auto hit = cache.load(req)) {
      row.estimate = *hit;
      row.from_cache = true;
    } else {
      row.estimate = compute_entry(req, threads);
      cache.store(req, row.estimate);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// Columns n,alpha1..,a1..,drift_id,S1,S2,delta,R,value,stderr; the alpha/a
// column count follows the widest row.
inline void write_table_csv(std::ostream& out, const std::vector<TableRow>& rows) {
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.estimate.a.size());
  out << 'n';
  for (std::size_t i = 1; i <= width; ++i) out << ",alpha" << i;
  for (std::size_t i = 1; i <= width; ++i) out << ",a" << i;
  out << ",drift_id,S1,S2,delta,R,value,stderr\n";
  out.precision(17);
  for (const auto& r : rows) {
    const auto& e = r.estimate;
    out << e.a.size();
    for (std::size_t i = 0; i < width; ++i) {
      out << ',';
      if (i < e.alpha.size()) out << e.alpha[i];
    }
    for (std::size_t i = 0; i < width; ++i) {
      out << ',';
      if (i < e.a.size()) out << e.a[i];
    }
    out << ",\"" << e.drift << "\"," << e.s1 << ',' << e.s2 << ',' << e.delta << ','
        << e.replicates << ',' << e.value << ',' << e.std_error << '\n';
  }
}

}  // namespace vecext
