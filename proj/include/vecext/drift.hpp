#pragma once

// Per-coordinate drift functions f_i with f_i(0) = 0.

#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "vecext/errors.hpp"

namespace vecext {

struct ZeroDrift {};

// c |t|^gamma on both sides of the origin.
struct PowerLaw {
  double c = 1.0;
  double gamma = 1.0;
};

// c t; intended for intervals inside [0, inf).
struct LinearPositive {
  double c = 1.0;
};

// sum_k c_k |t|^gamma_k, e.g. variance and trend terms with different powers.
struct PowerSum {
  std::vector<PowerLaw> terms;
};

struct UserDrift {
  std::function<double(double)> f;
  std::string id = "user";
  bool coercive = false;  // declared: f(t) -> +inf on the unbounded side(s)
};

using Drift = std::variant<ZeroDrift, PowerLaw, LinearPositive, PowerSum, UserDrift>;
using DriftSpec = std::vector<Drift>;

inline double evaluate(const Drift& drift, double t) {
  return std::visit(
      [t](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ZeroDrift>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, PowerLaw>) {
          return d.c * std::pow(std::fabs(t), d.gamma);
        } else if constexpr (std::is_same_v<T, LinearPositive>) {
          return d.c * t;
        } else if constexpr (std::is_same_v<T, PowerSum>) {
          double v = 0.0;
          for (const auto& p : d.terms) v += p.c * std::pow(std::fabs(t), p.gamma);
          return v;
        } else {
          return d.f(t);
        }
      },
      drift);
}

inline Drift scaled(const Drift& drift, double k) {
  return std::visit(
      [k](const auto& d) -> Drift {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ZeroDrift>) {
          return d;
        } else if constexpr (std::is_same_v<T, PowerLaw>) {
          return PowerLaw{k * d.c, d.gamma};
        } else if constexpr (std::is_same_v<T, LinearPositive>) {
          return LinearPositive{k * d.c};
        } else if constexpr (std::is_same_v<T, PowerSum>) {
          PowerSum out = d;
          for (auto& p : out.terms) p.c *= k;
          return out;
        } else {
          auto f = d.f;
          std::ostringstream id;
          id.precision(17);
          id << k << '*' << d.id;
          return UserDrift{[f, k](double t) { return k * f(t); }, id.str(), d.coercive && k > 0};
        }
      },
      drift);
}

inline bool is_zero(const Drift& drift) {
  if (std::holds_alternative<ZeroDrift>(drift)) return true;
  if (const auto* p = std::get_if<PowerLaw>(&drift)) return p->c == 0.0;
  if (const auto* l = std::get_if<LinearPositive>(&drift)) return l->c == 0.0;
  if (const auto* s = std::get_if<PowerSum>(&drift)) {
    for (const auto& p : s->terms) {
      if (p.c != 0.0) return false;
    }
    return true;
  }
  return false;
}

// Canonical text id, used in cache keys and CSV rows.
inline std::string drift_id(const Drift& drift) {
  std::ostringstream out;
  out.precision(17);
  std::visit(
      [&out](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, ZeroDrift>) {
          out << "zero";
        } else if constexpr (std::is_same_v<T, PowerLaw>) {
          out << "pow(" << d.c << ';' << d.gamma << ')';
        } else if constexpr (std::is_same_v<T, LinearPositive>) {
          out << "lin(" << d.c << ')';
        } else if constexpr (std::is_same_v<T, PowerSum>) {
          if (d.terms.empty()) out << "zero";
          for (std::size_t k = 0; k < d.terms.size(); ++k) {
            if (k) out << '+';
            out << "pow(" << d.terms[k].c << ';' << d.terms[k].gamma << ')';
          }
        } else {
          out << "user(" << d.id << ')';
        }
      },
      drift);
  return out.str();
}

inline std::string drift_id(const DriftSpec& drifts) {
  std::string id;
  for (std::size_t i = 0; i < drifts.size(); ++i) {
    if (i) id += '|';
    id += drift_id(drifts[i]);
  }
  return id;
}

// Parses the textual forms produced by drift_id: zero, pow(c;g), lin(c),
// pow(c;g)+pow(c;g)+... Also accepts "pow:c:g" and "lin:c" for command-line
// convenience.
inline Drift parse_drift(const std::string& text) {
  if (const auto plus = text.find('+'); plus != std::string::npos && plus > 0) {
    PowerSum sum;
    std::size_t start = 0;
    for (;;) {
      const auto end = text.find('+', start);
      const auto part = parse_drift(text.substr(start, end == std::string::npos ? end : end - start));
      const auto* p = std::get_if<PowerLaw>(&part);
      if (!p) throw DomainError("cannot parse drift '" + text + "': sums take pow terms only");
      sum.terms.push_back(*p);
      if (end == std::string::npos) break;
      start = end + 1;
    }
    return sum;
  }
  auto fail = [&]() -> Drift { throw DomainError("cannot parse drift '" + text + "'"); };
  if (text == "zero" || text == "0") return ZeroDrift{};
  auto numbers = [&](std::size_t start) {
    std::vector<double> out;
    std::string token;
    for (std::size_t k = start; k < text.size(); ++k) {
      const char ch = text[k];
      if (ch == ';' || ch == ':' || ch == ')') {
        if (!token.empty()) out.push_back(std::stod(token));
        token.clear();
      } else {
        token += ch;
      }
    }
    if (!token.empty()) out.push_back(std::stod(token));
    return out;
  };
  try {
    if (text.rfind("pow(", 0) == 0 || text.rfind("pow:", 0) == 0) {
      const auto v = numbers(4);
      if (v.size() != 2 || !(v[1] > 0.0)) return fail();
      return PowerLaw{v[0], v[1]};
    }
    if (text.rfind("lin(", 0) == 0 || text.rfind("lin:", 0) == 0) {
      const auto v = numbers(4);
      if (v.size() != 1) return fail();
      return LinearPositive{v[0]};
    }
  } catch (const std::invalid_argument&) {
    return fail();
  }
  return fail();
}

// Whether the drift provably tends to +inf on the given side (+1: t -> +inf,
// -1: t -> -inf).
inline bool coercive_towards(const Drift& drift, int side) {
  if (const auto* p = std::get_if<PowerLaw>(&drift)) return p->c > 0.0 && p->gamma > 0.0;
  if (const auto* l = std::get_if<LinearPositive>(&drift)) return side > 0 ? l->c > 0.0 : l->c < 0.0;
  if (const auto* s = std::get_if<PowerSum>(&drift)) {
    // the largest power dominates at infinity
    double top = -1.0;
    double coef = 0.0;
    for (const auto& p : s->terms) {
      if (p.c == 0.0) continue;
      if (p.gamma > top) {
        top = p.gamma;
        coef = p.c;
      } else if (p.gamma == top) {
        coef += p.c;
      }
    }
    return top > 0.0 && coef > 0.0;
  }
  if (const auto* u = std::get_if<UserDrift>(&drift)) return u->coercive;
  return false;
}

// If sum_i f_i(t) = theta |t|^p on the domain (lo, hi), returns (theta, p).
inline std::optional<std::pair<double, double>> power_law_sum(const DriftSpec& drifts, double lo,
                                                              double hi) {
  (void)hi;
  double theta = 0.0;
  std::optional<double> power;
  for (const auto& d : drifts) {
    if (is_zero(d)) continue;
    double c = 0.0;
    double g = 0.0;
    if (const auto* p = std::get_if<PowerLaw>(&d)) {
      c = p->c;
      g = p->gamma;
    } else if (const auto* l = std::get_if<LinearPositive>(&d)) {
      if (lo < 0.0) return std::nullopt;  // c t differs from c|t| for t < 0
      c = l->c;
      g = 1.0;
    } else if (const auto* s = std::get_if<PowerSum>(&d)) {
      for (const auto& p : s->terms) {
        if (p.c == 0.0) continue;
        if (power && *power != p.gamma) return std::nullopt;
        power = p.gamma;
        theta += p.c;
      }
      continue;
    } else {
      return std::nullopt;
    }
    if (power && *power != g) return std::nullopt;
    power = g;
    theta += c;
  }
  if (!power) return std::make_pair(0.0, 1.0);
  return std::make_pair(theta, *power);
}

}  // namespace vecext
