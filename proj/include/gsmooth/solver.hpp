#pragma once

// Outer iteration: recompute the truncation split l and half-quadratic
// weights mu from u^k, assemble, solve for u^{k+1}. Every step is a descent
// step of the truncated Huber objective.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "gsmooth/linsolve.hpp"
#include "gsmooth/system.hpp"

namespace gsmooth {

/// Absolute slack allowed on energy increases caused by rounding.
inline constexpr double kEnergySlack = 1e-9;

struct SmoothResult {
  ImageBuffer output;
  std::vector<double> energy_trace;  // E_u(u^k), k = 0..iterations run
  std::vector<SolveReport> solve_reports;
};

namespace detail {

inline bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

inline ImageBuffer solve_all_channels(const ImageBuffer& u, const ImageBuffer& f,
                                      const ImageBuffer& g, const SmoothConfig& cfg, double tol,
                                      std::vector<SolveReport>& reports) {
  ImageBuffer next = u;
  for (int c = 0; c < u.channels(); ++c) {
    const SparseSystem sys = assemble(u, f, g, cfg, c);
    const ImageBuffer plane = u.channel(c);
    SolveResult res = solve_spd(sys, plane.samples(), tol, cfg.linsolve_maxiter);
    reports.push_back(res.report);
    next.set_channel(c, ImageBuffer(u.width(), u.height(), 1, std::move(res.solution)));
  }
  return next;
}

inline void verify_descent_chain(const ImageBuffer& u_k, const ImageBuffer& u_next,
                                 const ImageBuffer& f, const ImageBuffer& g,
                                 const SmoothConfig& cfg) {
  constexpr double kRel = 1e-8;
  const AuxFields aux = compute_aux(u_k, f, g, cfg);
  const double e_u = energy_total(u_k, f, g, cfg);
  const double e_ul = energy_aux(u_k, f, g, aux.l_d, aux.l_s, cfg);
  const double e_hq = energy_hq(u_k, f, g, aux.l_d, aux.l_s, aux.mu_d, aux.mu_s, cfg);
  const double e_hq_next = energy_hq(u_next, f, g, aux.l_d, aux.l_s, aux.mu_d, aux.mu_s, cfg);
  if (!close_rel(e_u, e_ul, kRel))
    throw SolverError("descent check: E_u(u^k) != E_ul(u^k, l^k): " + std::to_string(e_u) +
                      " vs " + std::to_string(e_ul));
  if (!close_rel(e_ul, e_hq, kRel))
    throw SolverError("descent check: E_ul(u^k, l^k) != E_ulmu(u^k, l^k, mu^k): " +
                      std::to_string(e_ul) + " vs " + std::to_string(e_hq));
  if (e_hq_next > e_hq + kRel * std::max(1.0, e_hq))
    throw SolverError("descent check: half-quadratic energy increased: " +
                      std::to_string(e_hq) + " -> " + std::to_string(e_hq_next));
}

}  // namespace detail

/// One outer iteration from u_k. Appends one solve report per channel.
inline ImageBuffer smooth_step(const ImageBuffer& u_k, const ImageBuffer& f, const ImageBuffer& g,
                               const SmoothConfig& cfg, std::vector<SolveReport>* reports = nullptr,
                               double* energy_after = nullptr) {
  cfg.validate();
  detail::check_inputs(u_k, f, g);

  std::vector<SolveReport> local;
  const double e_before = energy_total(u_k, f, g, cfg);
  ImageBuffer next = detail::solve_all_channels(u_k, f, g, cfg, cfg.linsolve_tol, local);
  double e_after = energy_total(next, f, g, cfg);

  if (e_after > e_before + kEnergySlack) {
    // Exact minimizers always descend; a finite-tolerance solve gets one retry.
    local.clear();
    next = detail::solve_all_channels(u_k, f, g, cfg, cfg.linsolve_tol / 10.0, local);
    e_after = energy_total(next, f, g, cfg);
    if (e_after > e_before + kEnergySlack)
      throw SolverError("energy increased after retry: " + std::to_string(e_before) + " -> " +
                        std::to_string(e_after));
  }
  if (cfg.verify_descent) detail::verify_descent_chain(u_k, next, f, g, cfg);

  if (reports) reports->insert(reports->end(), local.begin(), local.end());
  if (energy_after) *energy_after = e_after;
  next.set_range(u_k.range());
  return next;
}

/// Runs cfg.iterations outer iterations starting from u^0 = f.
inline SmoothResult smooth(const ImageBuffer& f, const ImageBuffer& g, const SmoothConfig& cfg) {
  cfg.validate();
  detail::check_inputs(f, f, g);

  SmoothResult result;
  result.output = f;
  result.energy_trace.push_back(energy_total(f, f, g, cfg));
  for (int k = 0; k < cfg.iterations; ++k) {
    double e_next = 0.0;
    result.output = smooth_step(result.output, f, g, cfg, &result.solve_reports, &e_next);
    const double e_prev = result.energy_trace.back();
    result.energy_trace.push_back(e_next);
    if (cfg.early_stop && e_prev > 0.0 && std::abs(e_prev - e_next) / e_prev < 1e-6) break;
  }
  return result;
}

}  // namespace gsmooth
