#pragma once

// Flat key=value experiment files and list parsing for the command-line tool.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vecext::cli {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Ordered key/value pairs. '#' starts a comment line; values may be quoted.
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

inline ConfigEntries parse_config(const std::string& text) {
  ConfigEntries out;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw UsageError("config line " + std::to_string(lineno) + ": empty key");
    if (!seen.insert(key).second) throw UsageError("config key '" + key + "' given twice");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

inline ConfigEntries read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

inline std::string write_config(const ConfigEntries& entries) {
  std::string out;
  for (const auto& [k, v] : entries) {
    const bool quote = v.find_first_of(" \t#") != std::string::npos || v.empty();
    out += k + " = " + (quote ? "\"" + v + "\"" : v) + "\n";
  }
  return out;
}

// Splits on any of `seps`, trimming items; empty input gives an empty list.
inline std::vector<std::string> split(const std::string& text, const std::string& seps = ",") {
  std::vector<std::string> out;
  if (trim(text).empty()) return out;
  std::string cur;
  for (char ch : text) {
    if (seps.find(ch) != std::string::npos) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline double parse_number(const std::string& s) {
  const std::string t = trim(s);
  if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + t + "'");
  }
  if (used != t.size()) throw UsageError("not a number: '" + t + "'");
  return v;
}

inline std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split(text)) {
    if (item.empty()) throw UsageError(what + ": empty list item");
    out.push_back(parse_number(item));
  }
  return out;
}

// Merges config entries into an argument vector: for each key not already
// given on the command line as --key, inserts --key=value after the
// subcommand token. Flags given on the command line therefore win.
inline std::vector<std::string> merge_config(const std::vector<std::string>& args, std::size_t insert_at,
                                             const ConfigEntries& entries,
                                             const std::set<std::string>& known) {
  std::set<std::string> given;
  for (const auto& a : args) {
    if (a.rfind("--", 0) != 0) continue;
    const auto eq = a.find('=');
    given.insert(a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2));
  }
  std::vector<std::string> extra;
  for (const auto& [k, v] : entries) {
    if (!known.count(k)) throw UsageError("unknown config key '" + k + "'");
    if (!given.count(k)) extra.push_back("--" + k + "=" + v);
  }
  std::vector<std::string> out(args.begin(), args.begin() + static_cast<long>(insert_at));
  out.insert(out.end(), extra.begin(), extra.end());
  out.insert(out.end(), args.begin() + static_cast<long>(insert_at), args.end());
  return out;
}

}  // namespace vecext::cli
