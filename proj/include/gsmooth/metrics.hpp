#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gsmooth/core.hpp"

namespace gsmooth {

/// Boolean raster selecting the pixels a metric is evaluated on.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<bool> keep;
};

inline double mse(const ImageBuffer& x, const ImageBuffer& y) {
  if (!x.same_shape(y)) throw DimensionError("mse: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x.samples()[i] - y.samples()[i];
    s += d * d;
  }
  return s / static_cast<double>(x.size());
}

/// Peak signal-to-noise ratio in dB; +infinity for identical images.
inline double psnr(const ImageBuffer& x, const ImageBuffer& y, double peak = 1.0) {
  if (!(peak > 0.0)) throw std::invalid_argument("psnr: peak must be positive");
  const double m = mse(x, y);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / m);
}

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double peak = 1.0;
};

namespace detail {

inline std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(static_cast<std::size_t>(size) * size);
  const int r = size / 2;
  double sum = 0.0;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double d2 = double(x - r) * (x - r) + double(y - r) * (y - r);
      sum += w[y * size + x] = std::exp(-d2 / (2.0 * sigma * sigma));
    }
  for (double& v : w) v /= sum;
  return w;
}

inline double ssim_plane(const ImageBuffer& x, const ImageBuffer& y, int c, const SsimParams& p) {
  const std::vector<double> win = gaussian_window(p.window, p.sigma);
  const double c1 = (p.k1 * p.peak) * (p.k1 * p.peak);
  const double c2 = (p.k2 * p.peak) * (p.k2 * p.peak);
  const int W = x.width(), H = x.height(), S = p.window;
  double total = 0.0;
  long count = 0;
  for (int oy = 0; oy + S <= H; ++oy)
    for (int ox = 0; ox + S <= W; ++ox) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int wy = 0; wy < S; ++wy)
        for (int wx = 0; wx < S; ++wx) {
          const double w = win[wy * S + wx];
          const double a = x.at(ox + wx, oy + wy, c), b = y.at(ox + wx, oy + wy, c);
          mx += w * a;
          my += w * b;
          sxx += w * a * a;
          syy += w * b * b;
          sxy += w * a * b;
        }
      const double vx = sxx - mx * mx, vy = syy - my * my, cov = sxy - mx * my;
      total += ((2 * mx * my + c1) * (2 * cov + c2)) /
               ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return total / static_cast<double>(count);
}

}  // namespace detail

/// Mean structural similarity over all fully contained Gaussian windows,
/// averaged across channels.
inline double ssim(const ImageBuffer& x, const ImageBuffer& y, const SsimParams& p = {}) {
  if (!x.same_shape(y)) throw DimensionError("ssim: dimension mismatch");
  if (x.width() < p.window || x.height() < p.window)
    throw DimensionError("ssim: image smaller than the window");
  double s = 0.0;
  for (int c = 0; c < x.channels(); ++c) s += detail::ssim_plane(x, y, c, p);
  return s / x.channels();
}

/// Mean absolute error over the pixels selected by `mask` (all when absent).
inline double mae(const ImageBuffer& x, const ImageBuffer& y,
                  const std::optional<Mask>& mask = std::nullopt) {
  if (!x.same_shape(y)) throw DimensionError("mae: dimension mismatch");
  if (mask && (mask->width != x.width() || mask->height != x.height() ||
               mask->keep.size() != x.pixel_count()))
    throw DimensionError("mae: mask extent mismatch");
  double s = 0.0;
  std::size_t n = 0;
  const int C = x.channels();
  for (std::size_t p = 0; p < x.pixel_count(); ++p) {
    if (mask && !mask->keep[p]) continue;
    for (int c = 0; c < C; ++c) s += std::abs(x.samples()[p * C + c] - y.samples()[p * C + c]);
    n += C;
  }
  if (n == 0) throw std::invalid_argument("mae: mask selects no pixels");
  return s / static_cast<double>(n);
}

struct MetricRow {
  std::string image;
  std::string metric;
  double value = 0.0;
};

inline std::string format_metric(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

/// CSV with header `image,metric,value`.
inline void write_metrics_csv(std::ostream& os, const std::vector<MetricRow>& rows) {
  os << "image,metric,value\n";
  for (const MetricRow& r : rows) os << r.image << ',' << r.metric << ',' << format_metric(r.value) << '\n';
}

}  // namespace gsmooth
