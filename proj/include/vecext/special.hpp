#pragma once

// Normal tail, drift-integral quadrature and Gamma-function closed forms.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "vecext/errors.hpp"

namespace vecext {

// Psi(x) = P{N(0,1) > x}.
inline double tail_psi(double x) {
  const long double z = static_cast<long double>(x) / std::sqrt(2.0L);
  return static_cast<double>(0.5L * std::erfc(z));
}

// log Psi(x), finite for every finite x (no underflow in the far tail).
inline double log_tail_psi(double x) {
  if (x < 30.0) return static_cast<double>(std::log(0.5L * std::erfc(static_cast<long double>(x) / std::sqrt(2.0L))));
  // Mills ratio by the continued fraction R(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...)))).
  long double r = 0.0L;
  const long double xl = x;
  for (int k = 60; k >= 1; --k) r = k / (xl + r);
  const long double mills = 1.0L / (xl + r);
  return static_cast<double>(-0.5L * xl * xl - 0.5L * std::log(2.0L * std::numbers::pi_v<long double>) +
                             std::log(mills));
}

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double tail_cutoff = 1e-16;  // infinite ends truncated where |f| drops below this
  double max_extent = 1e8;
};

namespace detail {

// Finds R such that |f(t)| < cutoff for the sampled points beyond R on one
// side (sign = +1 or -1), by doubling from `start`.
inline double truncation_point(const std::function<double(double)>& f, double start, double sign,
                               const QuadratureOptions& opt) {
  double r = std::max(start, 1.0);
  int quiet = 0;
  while (r < opt.max_extent) {
    const double v = std::fabs(f(sign * r));
    if (v < opt.tail_cutoff) {
      if (++quiet == 3) return r;  // three consecutive doublings below the cutoff
    } else {
      quiet = 0;
    }
    r *= 2.0;
  }
  throw std::runtime_error("quadrature: integrand does not decay on an infinite interval");
}

inline double gk_integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol) {
  if (!(b > a)) return 0.0;
  double error = 0.0;
  const double length = b - a;
  // Tolerances near machine precision make every subinterval split (roundoff
  // never meets them), so the relative target is floored and the depth capped.
  const double rel = std::max(abs_tol / std::max(length, 1.0), 1e-12);
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, rel, &error);
}

}  // namespace detail

// \int_lo^hi f(t) dt with lo in [-inf, inf), hi in (-inf, inf]. Infinite ends
// are truncated where the integrand falls below opt.tail_cutoff; the domain
// is split at 0 and at powers of two so peaked integrands are resolved.
inline double integrate(const std::function<double(double)>& f, double lo, double hi,
                        QuadratureOptions opt = {}) {
  if (!(lo < hi)) return 0.0;
  if (std::isinf(lo) && lo > 0) throw DomainError("integrate: lower limit +inf");
  if (std::isinf(hi) && hi < 0) throw DomainError("integrate: upper limit -inf");
  double a = lo;
  double b = hi;
  if (std::isinf(a)) a = -detail::truncation_point(f, std::max(0.0, -hi), -1.0, opt);
  if (std::isinf(b)) b = detail::truncation_point(f, std::max(0.0, lo), 1.0, opt);
  // Breakpoints: 0 and +-2^k, so that features near the origin stay resolved.
  std::vector<double> cuts{a};
  auto add_cut = [&](double c) {
    if (c > a && c < b) cuts.push_back(c);
  };
  add_cut(0.0);
  for (double p = 1.0 / 64.0; p < std::max(std::fabs(a), std::fabs(b)); p *= 2.0) {
    add_cut(p);
    add_cut(-p);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  const double tol = opt.abs_tol / static_cast<double>(cuts.size());
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    total += detail::gk_integrate(f, cuts[k], cuts[k + 1], tol);
  }
  return total;
}

// \int_0^x e^{-theta t^p} dt for x in [0, inf], theta > 0, p > 0.
inline double power_exponential_integral(double theta, double p, double x) {
  if (!(theta > 0.0) || !(p > 0.0)) throw DomainError("power_exponential_integral: theta, p > 0");
  if (x <= 0.0) return 0.0;
  const double full = std::tgamma(1.0 + 1.0 / p) * std::pow(theta, -1.0 / p);
  if (std::isinf(x)) return full;
  return full * boost::math::gamma_p(1.0 / p, theta * std::pow(x, p));
}

// \int_lo^hi e^{-theta |t|^p} dt.
inline double power_exponential_integral(double theta, double p, double lo, double hi) {
  if (!(lo < hi)) return 0.0;
  auto half = [&](double x) { return power_exponential_integral(theta, p, x); };
  if (lo >= 0.0) return half(hi) - half(lo);
  if (hi <= 0.0) return half(-lo) - half(-hi);
  return half(-lo) + half(hi);
}

}  // namespace vecext
