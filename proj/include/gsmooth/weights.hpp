#pragma once

// Spatial and guidance weights of the smoothing objective.
//
// The spatial kernel is a decaying Gaussian, exp(-|i-j|^2 / (2 sigma^2)).
// Printed without the minus sign the kernel would grow with distance, which is
// not what a Gaussian spatial kernel means; the decaying form is used.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "gsmooth/neighborhood.hpp"

namespace gsmooth {

/// Gaussian spatial weight of an offset. sigma <= 0 is the singleton-patch
/// case (radius 0), where only the center exists and weighs 1.
inline double spatial_weight(Offset o, double sigma) {
  const double d2 = static_cast<double>(o.dx) * o.dx + static_cast<double>(o.dy) * o.dy;
  if (d2 == 0.0) return 1.0;
  if (!(sigma > 0.0)) throw std::domain_error("spatial_weight: sigma must be positive");
  return std::exp(-d2 / (2.0 * sigma * sigma));
}

/// 1 / (||gi - gj||^alpha + delta), Euclidean norm across guidance channels.
inline double guidance_weight(std::span<const double> gi, std::span<const double> gj,
                              double alpha, double delta) {
  if (gi.size() != gj.size()) throw DimensionError("guidance_weight: channel count mismatch");
  double d2 = 0.0;
  for (std::size_t c = 0; c < gi.size(); ++c) {
    const double d = gi[c] - gj[c];
    d2 += d * d;
  }
  if (alpha == 0.0) return 1.0 / (1.0 + delta);
  const double norm = std::sqrt(d2);
  const double p = alpha == 0.5 ? std::sqrt(norm) : alpha == 1.0 ? norm : std::pow(norm, alpha);
  return 1.0 / (p + delta);
}

inline double guidance_weight(double gi, double gj, double alpha, double delta) {
  return guidance_weight(std::span<const double>(&gi, 1), std::span<const double>(&gj, 1), alpha,
                         delta);
}

/// Spatial weights for one offset set plus the guidance parameters.
struct WeightPlan {
  std::vector<double> spatial;
  double guidance_alpha = 0.0;
  double guidance_delta = 1e-3;

  static WeightPlan make(const OffsetSet& offsets, double sigma, double alpha, double delta) {
    WeightPlan plan;
    plan.spatial.reserve(offsets.size());
    for (const Offset& o : offsets) plan.spatial.push_back(spatial_weight(o, sigma));
    plan.guidance_alpha = alpha;
    plan.guidance_delta = delta;
    return plan;
  }

  double guidance(std::span<const double> gi, std::span<const double> gj) const {
    return guidance_weight(gi, gj, guidance_alpha, guidance_delta);
  }
};

}  // namespace gsmooth
