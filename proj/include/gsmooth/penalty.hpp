#pragma once

// Truncated Huber penalty and the closed-form auxiliary-variable updates used
// by the half-quadratic solver.

#include <cmath>
#include <stdexcept>

#include "gsmooth/core.hpp"

namespace gsmooth {

namespace detail {
inline void require_positive_knee(double a) {
  if (!(a > 0.0)) throw std::domain_error("huber: a must be positive");
}
}  // namespace detail

/// Huber penalty: x^2/(2a) inside the knee, |x| - a/2 outside.
inline double huber(double x, double a) {
  detail::require_positive_knee(a);
  const double ax = std::abs(x);
  return ax < a ? x * x / (2.0 * a) : ax - 0.5 * a;
}

/// Huber penalty capped at b - a/2 for |x| > b.
inline double truncated_huber(double x, const TruncatedHuberParams& p) {
  p.validate();
  return std::abs(x) <= p.b ? huber(x, p.a) : p.b - 0.5 * p.a;
}

/// h_T'(x)/x, taking the one-sided limit at |x| = b.
inline double edge_stop(double x, const TruncatedHuberParams& p) {
  p.validate();
  const double ax = std::abs(x);
  if (ax < p.a) return 1.0 / p.a;
  if (ax <= p.b) return 1.0 / ax;
  return 0.0;
}

/// Minimizer over l of h(grad - l) + (b - a/2)|l|_0. Ties at |grad| == b go to 0.
inline double l_update(double grad, double b) { return std::abs(grad) <= b ? 0.0 : grad; }

/// Half-quadratic weight minimizing mu*r^2 + psi(mu).
inline double mu_update(double residual, double a) {
  detail::require_positive_knee(a);
  const double ar = std::abs(residual);
  return ar < a ? 0.5 / a : 0.5 / ar;
}

/// Dual term of the multiplicative half-quadratic form of huber(., a):
///   huber(x, a) = min_{0 < mu <= 1/(2a)} mu*x^2 + psi(mu, a).
inline double psi(double mu, double a) {
  detail::require_positive_knee(a);
  if (!(mu > 0.0) || mu > 0.5 / a * (1.0 + 1e-12))
    throw std::domain_error("psi: mu outside (0, 1/(2a)]");
  return 0.25 / mu - 0.5 * a;
}

// Unchecked variants for inner loops whose parameters were validated upfront.
namespace detail {

inline double huber_unchecked(double x, double a) {
  const double ax = std::abs(x);
  return ax < a ? x * x / (2.0 * a) : ax - 0.5 * a;
}

inline double truncated_huber_unchecked(double x, double a, double b) {
  return std::abs(x) <= b ? huber_unchecked(x, a) : b - 0.5 * a;
}

inline double mu_update_unchecked(double residual, double a) {
  const double ar = std::abs(residual);
  return ar < a ? 0.5 / a : 0.5 / ar;
}

}  // namespace detail

}  // namespace gsmooth
