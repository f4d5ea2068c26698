#pragma once

// Universal constants, the sample-complexity map m0, the adversarial offset
// r and error floor epsilon0, the RAIC right-hand side, and the error
// recurrence with its closed form.

#include "onebit/linops.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace onebit {

struct UniversalConstants {
  double a;
  double b;
  double c1;
  double c2;
  double c3;
  double c4;
  double c;
};

/// b is taken as the printed numeric value; it has no closed form here.
inline const UniversalConstants& constants() {
  static const UniversalConstants k = [] {
    constexpr double pi = std::numbers::pi;
    UniversalConstants u{};
    u.a = 16.0;
    u.b = 379.1038;
    u.c1 = std::sqrt(3.0 * pi / u.b) * (1.0 + 16.0 * std::sqrt(2.0) / 3.0);
    u.c2 = (3.0 / u.b) *
           (1.0 + 4.0 * pi / 3.0 + 8.0 * std::sqrt(3.0 * pi) / 3.0 + 8.0 * std::sqrt(6.0 * pi));
    u.c3 = 13.0 * std::sqrt(pi) / std::sqrt(u.b);
    u.c4 = 2.0 + 4.0 * std::sqrt(pi);
    u.c = 4.0 * std::pow(u.c1 + std::sqrt(u.c1 * u.c1 + u.c2), 2.0);
    return u;
  }();
  return k;
}

/// log C(n, k) via log-gamma; safe for n in the thousands.
inline double log_binomial(double n, double k) {
  if (k < 0 || k > n) throw std::invalid_argument("log_binomial: need 0 <= k <= n");
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// m0(delta) = (b/delta) log( C(n,k)^2 C(n,2k) (12b/delta)^{2k} (3a/rho) ).
/// Strictly decreasing in delta.
inline double m0(double delta, Index n, Index k, double rho) {
  const auto& u = constants();
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("m0: delta must be in (0,1]");
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("m0: rho must be in (0,1]");
  if (k < 1 || n < 2 * k) throw std::invalid_argument("m0: need k >= 1 and n >= 2k");
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double log_arg = 2.0 * log_binomial(nd, kd) + log_binomial(nd, 2.0 * kd) +
                         2.0 * kd * std::log(12.0 * u.b / delta) +
                         std::log(3.0 * u.a / rho);
  return u.b / delta * log_arg;
}

/// c3 sqrt(delta tau) + c4 tau sqrt(log(2e/tau)); the extra error the RAIC
/// right-hand side pays for up to tau*m corrupted responses.
inline double adversarial_term(double delta, double tau) {
  const auto& u = constants();
  if (!(tau > 0.0 && tau <= 1.0))
    throw std::invalid_argument("adversarial_term: tau must be in (0,1]");
  if (!(delta > 0.0 && delta <= 1.0))
    throw std::invalid_argument("adversarial_term: delta must be in (0,1]");
  return u.c3 * std::sqrt(delta * tau) +
         u.c4 * tau * std::sqrt(std::log(2.0 * std::numbers::e / tau));
}

/// Right-hand side of the restricted approximate invertibility bound:
/// c1 sqrt(delta d) + c2 delta + adversarial_term(delta, tau).
inline double raic_rhs(double delta, double d, double tau) {
  const auto& u = constants();
  if (!(d >= 0.0 && d <= 2.0)) throw std::invalid_argument("raic_rhs: d must be in [0,2]");
  return u.c1 * std::sqrt(delta * d) + u.c2 * delta + adversarial_term(delta, tau);
}

/// r = (c/c2) * adversarial_term(epsilon/c, tau): the offset the flip budget
/// adds to the achievable error floor. Satisfies c2*r/c =
/// adversarial_term(epsilon/c, tau).
inline double r_offset(double epsilon, double tau) {
  const auto& u = constants();
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("r_offset: epsilon must be in (0,1]");
  return u.c / u.c2 * adversarial_term(epsilon / u.c, tau);
}

/// Asymptotic error floor epsilon0 = epsilon + r. tau = 0 means no
/// corruption, so r vanishes.
inline double epsilon0(double epsilon, double tau) {
  if (tau == 0.0) return epsilon;
  return epsilon + r_offset(epsilon, tau);
}

/// e(0) = 2; e(t) = 4 c1 sqrt((gamma/c) e(t-1)) + 4 c2 gamma / c.
/// Returns e(0..T).
inline std::vector<double> error_recurrence(double gamma, int T) {
  const auto& u = constants();
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw std::invalid_argument("error_recurrence: gamma must be in (0,1]");
  if (T < 0) throw std::invalid_argument("error_recurrence: T must be >= 0");
  std::vector<double> e(static_cast<std::size_t>(T) + 1);
  e[0] = 2.0;
  for (int t = 1; t <= T; ++t) {
    const double prev = e[static_cast<std::size_t>(t) - 1];
    e[static_cast<std::size_t>(t)] =
        4.0 * u.c1 * std::sqrt(gamma / u.c * prev) + 4.0 * u.c2 * gamma / u.c;
  }
  return e;
}

/// 2^{2^{-t}} gamma^{1 - 2^{-t}}; equals 2 at t = 0 and tends to gamma.
inline double closed_form_bound(double gamma, int t) {
  if (!(gamma > 0.0)) throw std::invalid_argument("closed_form_bound: gamma must be > 0");
  if (t < 0) throw std::invalid_argument("closed_form_bound: t must be >= 0");
  const double p = std::ldexp(1.0, -t);  // 2^{-t}, exact
  return std::pow(2.0, p) * std::pow(gamma, 1.0 - p);
}

struct RecurrencePair {
  std::vector<double> f1;  // f1(0) = 2, f1(t) = v w + sqrt(v f1(t-1))
  std::vector<double> f2;  // f2(t) = 2^{2^{-t}} (u^2 v)^{1 - 2^{-t}}
  double u;                // (1 + sqrt(1 + 4w)) / 2
};

/// The pair of sequences behind the closed-form bound. Requires the
/// hypothesis 1 <= u <= sqrt(2/v); both sequences decrease to u^2 v and
/// f1 <= f2 pointwise.
inline RecurrencePair fact_recurrence_pair(double v, double w, int T) {
  if (!(v > 0.0)) throw std::invalid_argument("fact_recurrence_pair: v must be > 0");
  if (!(w >= 0.0)) throw std::invalid_argument("fact_recurrence_pair: w must be >= 0");
  if (T < 0) throw std::invalid_argument("fact_recurrence_pair: T must be >= 0");
  RecurrencePair out;
  out.u = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * w));
  if (out.u < 1.0)
    throw std::domain_error("fact_recurrence_pair: hypothesis u >= 1 fails");
  if (out.u > std::sqrt(2.0 / v))
    throw std::domain_error("fact_recurrence_pair: hypothesis u <= sqrt(2/v) fails (u = " +
                            std::to_string(out.u) + ", sqrt(2/v) = " +
                            std::to_string(std::sqrt(2.0 / v)) + ")");
  const double limit = out.u * out.u * v;
  out.f1.resize(static_cast<std::size_t>(T) + 1);
  out.f2.resize(static_cast<std::size_t>(T) + 1);
  out.f1[0] = 2.0;
  out.f2[0] = 2.0;
  for (int t = 1; t <= T; ++t) {
    out.f1[static_cast<std::size_t>(t)] =
        v * w + std::sqrt(v * out.f1[static_cast<std::size_t>(t) - 1]);
    const double p = std::ldexp(1.0, -t);
    out.f2[static_cast<std::size_t>(t)] = std::pow(2.0, p) * std::pow(limit, 1.0 - p);
  }
  return out;
}

}  // namespace onebit
