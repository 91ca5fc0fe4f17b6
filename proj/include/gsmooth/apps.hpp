#pragma once

// Application pipelines built on the smoother: detail enhancement, HDR tone
// mapping, clip-art artifact removal, guided depth upsampling, joint
// (flash/no-flash) filtering and texture removal.

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <string>

#include "gsmooth/solver.hpp"

namespace gsmooth {

namespace detail {

inline void require_mode(const SmoothConfig& cfg, std::initializer_list<Mode> allowed,
                         const char* pipeline) {
  if (!cfg.mode) return;  // hand-built configurations are trusted
  for (Mode m : allowed)
    if (*cfg.mode == m) return;
  throw ConfigError(std::string(pipeline) + ": unsupported preset " +
                    std::string(mode_name(*cfg.mode)));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Layer decomposition

struct LayerDecomposition {
  ImageBuffer base;
  ImageBuffer detail;  // input - base, signed
};

/// Self-guided base/detail split.
inline LayerDecomposition decompose(const ImageBuffer& f, const SmoothConfig& cfg) {
  LayerDecomposition out;
  out.base = smooth(f, f, cfg).output;
  out.detail = f;
  for (std::size_t i = 0; i < f.size(); ++i) out.detail.samples()[i] -= out.base.samples()[i];
  return out;
}

/// base + boost * detail. Not clamped; clamping happens at export.
inline ImageBuffer detail_enhance(const ImageBuffer& f, const SmoothConfig& cfg, double boost) {
  detail::require_mode(cfg, {Mode::kEP1, Mode::kSP2}, "detail_enhance");
  if (!(boost >= 1.0)) throw std::invalid_argument("detail_enhance: boost must be >= 1");
  if (boost == 1.0) return f;
  const LayerDecomposition layers = decompose(f, cfg);
  ImageBuffer out = layers.base;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples()[i] += boost * layers.detail.samples()[i];
  return out;
}

// ---------------------------------------------------------------------------
// HDR tone mapping

struct ToneMapParams {
  double log_offset = 1e-6;       // added to luminance before log10
  double display_range = 2.5;     // log10 units kept after compression
  double saturation = 0.6;        // exponent on chromaticity ratios
  double display_gamma = 1.0 / 2.2;
};

/// Mean of the color channels (or the only channel).
inline ImageBuffer luminance(const ImageBuffer& img) {
  ImageBuffer L(img.width(), img.height(), 1, 0.0, img.range());
  const int C = img.channels();
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    double s = 0.0;
    for (int c = 0; c < C; ++c) s += img.samples()[p * C + c];
    L.samples()[p] = s / C;
  }
  return L;
}

/// Base/detail tone mapping on log-luminance. The log-luminance is rescaled
/// to [0,1] for smoothing and mapped back; the compressed base is shifted so
/// its maximum sits at 0, squeezed into `display_range` log units when wider,
/// exponentiated, gamma-encoded, and colors are reattached through
/// (channel / luminance)^saturation.
inline ImageBuffer tone_map(const ImageBuffer& hdr, const SmoothConfig& cfg, double compression,
                            const ToneMapParams& tp = {}) {
  detail::require_mode(cfg, {Mode::kEP1, Mode::kSP2}, "tone_map");
  if (!(compression > 0.0 && compression <= 1.0))
    throw std::invalid_argument("tone_map: compression must be in (0, 1]");
  for (double v : hdr.samples())
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("tone_map: radiance must be positive and finite");

  const ImageBuffer L = luminance(hdr);
  const std::size_t n = L.pixel_count();
  ImageBuffer log_l(L.width(), L.height(), 1, 0.0, SampleRange::kLogLuminance);
  for (std::size_t p = 0; p < n; ++p)
    log_l.samples()[p] = std::log10(L.samples()[p] + tp.log_offset);

  const auto [lo_it, hi_it] = std::minmax_element(log_l.samples().begin(), log_l.samples().end());
  const double lo = *lo_it, hi = *hi_it;
  ImageBuffer base_log = log_l;
  if (hi > lo) {
    ImageBuffer unit(L.width(), L.height(), 1, 0.0);
    for (std::size_t p = 0; p < n; ++p) unit.samples()[p] = (log_l.samples()[p] - lo) / (hi - lo);
    const ImageBuffer base_unit = smooth(unit, unit, cfg).output;
    for (std::size_t p = 0; p < n; ++p) base_log.samples()[p] = lo + base_unit.samples()[p] * (hi - lo);
  }

  const auto [bmin, bmax] =
      std::minmax_element(base_log.samples().begin(), base_log.samples().end());
  const double base_max = *bmax;
  const double compressed_range = compression * (*bmax - *bmin);
  const double scale =
      compressed_range > tp.display_range ? tp.display_range / compressed_range : 1.0;

  ImageBuffer out(hdr.width(), hdr.height(), hdr.channels(), 0.0);
  const int C = hdr.channels();
  for (std::size_t p = 0; p < n; ++p) {
    const double base = base_log.samples()[p];
    const double detail = log_l.samples()[p] - base;
    const double out_log = scale * (compression * (base - base_max) + detail);
    const double lum = std::pow(10.0, out_log * tp.display_gamma);
    for (int c = 0; c < C; ++c) {
      const double ratio = hdr.samples()[p * C + c] / L.samples()[p];
      out.samples()[p * C + c] = std::pow(ratio, tp.saturation) * lum;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Clip-art compression artifact removal

struct ClipartSchedule {
  double lambda = 0.4;
  double b = 0.15;
};

/// Quality 10 uses lambda 0.4, b 0.15; every +10 halves lambda and lowers b by 0.01.
inline ClipartSchedule clipart_schedule(int quality) {
  if (quality < 10 || quality > 90 || quality % 10 != 0)
    throw ConfigError("clipart: quality must be one of 10, 20, ..., 90");
  const int steps = (quality - 10) / 10;
  return {0.4 / std::ldexp(1.0, steps), static_cast<double>(15 - steps) / 100.0};
}

inline SmoothConfig clipart_config(int quality) {
  const ClipartSchedule s = clipart_schedule(quality);
  PresetOverrides ov;
  ov.lambda = s.lambda;
  ov.b_d = s.b;
  ov.b_s = s.b;
  ov.r_d = 2;
  ov.r_s = 2;
  return mode_preset(Mode::kEPSP, ov);
}

inline ImageBuffer clipart_restore(const ImageBuffer& f, const SmoothConfig& cfg) {
  detail::require_mode(cfg, {Mode::kEPSP}, "clipart_restore");
  return smooth(f, f, cfg).output;
}

inline ImageBuffer clipart_restore(const ImageBuffer& f, int quality) {
  return clipart_restore(f, clipart_config(quality));
}

// ---------------------------------------------------------------------------
// Guided depth upsampling

struct UpsampleSchedule {
  double lambda = 0.5;
  double b = 0.08;
  int radius = 5;
};

/// Per-factor settings for 2x/4x/8x/16x upsampling.
inline UpsampleSchedule upsample_schedule(int factor) {
  switch (factor) {
    case 2: return {0.1, 0.1, 5};
    case 4: return {0.25, 0.1, 5};
    case 8: return {0.5, 0.08, 5};
    case 16: return {0.95, 0.07, 5};
    default: throw ConfigError("upsample: no schedule for factor " + std::to_string(factor));
  }
}

inline SmoothConfig upsample_config(int factor, int stride = 1) {
  const UpsampleSchedule s = upsample_schedule(factor);
  PresetOverrides ov;
  ov.lambda = s.lambda;
  ov.b_d = s.b;
  ov.b_s = s.b;
  ov.r_d = s.radius;
  ov.r_s = s.radius;
  ov.stride = stride;
  return mode_preset(Mode::kEPSP, ov);
}

namespace detail {

inline double cubic_kernel(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

}  // namespace detail

/// Bicubic (Keys, a = -0.5) resampling with pixel-center alignment and
/// clamped borders.
inline ImageBuffer bicubic_resize(const ImageBuffer& src, int width, int height) {
  if (width <= 0 || height <= 0) throw DimensionError("bicubic_resize: bad target size");
  ImageBuffer out(width, height, src.channels(), 0.0, src.range());
  const double sx = static_cast<double>(src.width()) / width;
  const double sy = static_cast<double>(src.height()) / height;
  const int C = src.channels();
  for (int y = 0; y < height; ++y) {
    const double fy = (y + 0.5) * sy - 0.5;
    const int iy = static_cast<int>(std::floor(fy));
    std::array<double, 4> wy{};
    for (int m = 0; m < 4; ++m) wy[m] = detail::cubic_kernel(fy - (iy - 1 + m));
    for (int x = 0; x < width; ++x) {
      const double fx = (x + 0.5) * sx - 0.5;
      const int ix = static_cast<int>(std::floor(fx));
      std::array<double, 4> wx{};
      for (int m = 0; m < 4; ++m) wx[m] = detail::cubic_kernel(fx - (ix - 1 + m));
      for (int c = 0; c < C; ++c) {
        double acc = 0.0;
        for (int my = 0; my < 4; ++my) {
          const int yy = std::clamp(iy - 1 + my, 0, src.height() - 1);
          for (int mx = 0; mx < 4; ++mx) {
            const int xx = std::clamp(ix - 1 + mx, 0, src.width() - 1);
            acc += wy[my] * wx[mx] * src.at(xx, yy, c);
          }
        }
        out.at(x, y, c) = acc;
      }
    }
  }
  return out;
}

/// Upsamples `depth_lr` by `factor` (bicubic) and smooths it under the
/// full-resolution guide.
inline ImageBuffer guided_upsample(const ImageBuffer& depth_lr, const ImageBuffer& guide,
                                   int factor, const SmoothConfig& cfg) {
  detail::require_mode(cfg, {Mode::kEPSP}, "guided_upsample");
  if (factor < 1) throw std::invalid_argument("guided_upsample: factor must be >= 1");
  if (guide.width() != depth_lr.width() * factor || guide.height() != depth_lr.height() * factor)
    throw DimensionError("guided_upsample: guide must be factor times the depth resolution");
  const ImageBuffer init =
      factor == 1 ? depth_lr : bicubic_resize(depth_lr, guide.width(), guide.height());
  return smooth(init, guide, cfg).output;
}

// ---------------------------------------------------------------------------
// Joint filtering and texture removal

inline ImageBuffer joint_filter(const ImageBuffer& target, const ImageBuffer& guide,
                                const SmoothConfig& cfg) {
  detail::require_mode(cfg, {Mode::kEPSP}, "joint_filter");
  if (!target.same_extent(guide)) throw DimensionError("joint_filter: guide extent mismatch");
  return smooth(target, guide, cfg).output;
}

inline ImageBuffer texture_remove(const ImageBuffer& f, double lambda) {
  PresetOverrides ov;
  ov.lambda = lambda;
  return smooth(f, f, mode_preset(Mode::kSP1, ov)).output;
}

}  // namespace gsmooth
