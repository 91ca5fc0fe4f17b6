#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "gsmooth/system.hpp"

namespace gsmooth {

struct SolveReport {
  int iterations_used = 0;
  double final_relative_residual = 0.0;
  bool converged = false;
};

struct SolveResult {
  std::vector<double> solution;
  SolveReport report;
};

namespace detail {

// Serial on purpose: a fixed summation order keeps runs bit-reproducible.
inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

/// Jacobi-preconditioned conjugate gradients, warm-started from x0.
/// Convergence means ||M x - rhs|| / ||rhs|| <= tol. On failure the last
/// iterate is returned with converged = false.
inline SolveResult solve_spd(const SparseSystem& sys, std::span<const double> x0, double tol,
                             int maxiter) {
  const std::size_t n = sys.n();
  if (x0.size() != n) throw DimensionError("solve_spd: x0 size mismatch");
  if (!(tol > 0.0) || maxiter < 1) throw std::invalid_argument("solve_spd: bad tolerance");
  for (double d : sys.diag)
    if (!(d > 0.0)) throw SolverError("solve_spd: non-positive diagonal entry");

  SolveResult out;
  out.solution.assign(x0.begin(), x0.end());
  std::vector<double>& x = out.solution;
  std::vector<double> r(n), z(n), p(n), q(n);

  const double rhs_norm = std::sqrt(detail::dot(sys.rhs, sys.rhs));
  const double scale = rhs_norm > 0.0 ? rhs_norm : 1.0;
  auto true_residual = [&] {
    sys.multiply(x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = sys.rhs[i] - q[i];
    return std::sqrt(detail::dot(r, r)) / scale;
  };

  double res = true_residual();
  out.report.final_relative_residual = res;
  if (res <= tol) {
    out.report.converged = true;
    return out;
  }

  int it = 0;
  // The recurrence residual drifts from the true one; on apparent convergence
  // the true residual is recomputed and the iteration restarted if needed.
  while (it < maxiter) {
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / sys.diag[i];
    p = z;
    double rz = detail::dot(r, z);
    bool restart = false;
    while (it < maxiter && !restart) {
      sys.multiply(p, q);
      const double pq = detail::dot(p, q);
      if (!(pq > 0.0)) break;  // breakdown: p vanished or M lost definiteness
      const double step = rz / pq;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += step * p[i];
        r[i] -= step * q[i];
      }
      ++it;
      if (std::sqrt(detail::dot(r, r)) / scale <= tol) {
        restart = true;
        break;
      }
      for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / sys.diag[i];
      const double rz_next = detail::dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    res = true_residual();
    out.report.iterations_used = it;
    out.report.final_relative_residual = res;
    if (res <= tol) {
      out.report.converged = true;
      break;
    }
    if (!restart) break;
  }
  return out;
}

}  // namespace gsmooth
