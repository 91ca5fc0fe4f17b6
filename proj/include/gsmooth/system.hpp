#pragma once

// Energy evaluation and linear-system assembly for one outer iteration.
//
// Three nested energies are available:
//   energy_total  E_u(u)                  truncated Huber objective
//   energy_aux    E_ul(u, l)              Huber + L0 split of the truncation
//   energy_hq     E_ulmu(u, l, mu)        multiplicative half-quadratic form
// With l and mu at their closed-form optima the three coincide; the linear
// system is the stationarity condition of energy_hq in u.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "gsmooth/core.hpp"
#include "gsmooth/neighborhood.hpp"
#include "gsmooth/penalty.hpp"
#include "gsmooth/weights.hpp"

namespace gsmooth {

/// Symmetric stencil matrix M = A - 2*lambda*W plus right-hand side.
///
/// Off-diagonal entries are stored once per unordered pixel pair, at the
/// row-major smaller endpoint: offdiag[i*K + k] is M(i, i + pair_offsets[k]),
/// zero when that neighbor falls outside the image.
struct SparseSystem {
  int width = 0;
  int height = 0;
  std::vector<Offset> pair_offsets;
  std::vector<double> diag;
  std::vector<double> offdiag;
  std::vector<double> rhs;

  std::size_t n() const { return diag.size(); }
  std::size_t pairs_per_pixel() const { return pair_offsets.size(); }

  /// y = M x.
  void multiply(std::span<const double> x, std::span<double> y) const {
    const int W = width, H = height;
    const std::size_t K = pair_offsets.size();
#pragma omp parallel for schedule(static)
    for (int yy = 0; yy < H; ++yy) {
      const std::size_t row = static_cast<std::size_t>(yy) * W;
      for (int xx = 0; xx < W; ++xx) y[row + xx] = diag[row + xx] * x[row + xx];
      for (std::size_t k = 0; k < K; ++k) {
        const Offset o = pair_offsets[k];
        const long delta = static_cast<long>(o.dy) * W + o.dx;
        const int x0 = std::max(0, -o.dx), x1 = std::min(W, W - o.dx);
        // Forward neighbor (stored in this row).
        if (yy + o.dy < H) {
          for (int xx = x0; xx < x1; ++xx) {
            const std::size_t i = row + xx;
            y[i] += offdiag[i * K + k] * x[i + delta];
          }
        }
        // Backward neighbor (stored at the neighbor).
        if (yy - o.dy >= 0) {
          const int b0 = std::max(0, o.dx), b1 = std::min(W, W + o.dx);
          for (int xx = b0; xx < b1; ++xx) {
            const std::size_t i = row + xx;
            const std::size_t j = i - delta;
            y[i] += offdiag[j * K + k] * x[j];
          }
        }
      }
    }
  }

  /// Entry M(i, j); linear scan over the stencil, for tests and diagnostics.
  double entry(std::size_t i, std::size_t j) const {
    if (i == j) return diag[i];
    if (j < i) std::swap(i, j);
    const int xi = static_cast<int>(i % width), yi = static_cast<int>(i / width);
    const int xj = static_cast<int>(j % width), yj = static_cast<int>(j / width);
    for (std::size_t k = 0; k < pair_offsets.size(); ++k)
      if (pair_offsets[k] == Offset{xj - xi, yj - yi}) return offdiag[i * pair_offsets.size() + k];
    return 0.0;
  }
};

namespace detail {

inline void check_inputs(const ImageBuffer& u, const ImageBuffer& f, const ImageBuffer& g) {
  if (u.empty() || f.empty() || g.empty()) throw DimensionError("empty image");
  if (!u.same_shape(f)) throw DimensionError("u and f must have the same dimensions");
  if (!u.same_extent(g)) throw DimensionError("guidance must match the target extent");
  if (!u.all_finite() || !f.all_finite() || !g.all_finite())
    throw std::invalid_argument("non-finite sample in input");
}

/// Offsets and spatial weights of both neighborhoods, prepared once per run.
struct Stencils {
  OffsetSet data;
  OffsetSet smooth;
  std::vector<double> data_spatial;
  std::vector<double> smooth_spatial;
  std::vector<Offset> pairs;             // forward half of `smooth`
  std::vector<int> smooth_to_pair;       // index into pairs, -1 for backward offsets

  explicit Stencils(const SmoothConfig& cfg)
      : data(dilated_offsets(cfg.data_nbr)), smooth(dilated_offsets(cfg.smooth_nbr)) {
    for (const Offset& o : data)
      data_spatial.push_back(cfg.data_nbr.radius == 0 ? 1.0 : spatial_weight(o, cfg.data_sigma()));
    for (const Offset& o : smooth) smooth_spatial.push_back(spatial_weight(o, cfg.smooth_sigma()));
    pairs = forward_half(smooth);
    for (const Offset& o : smooth) {
      int idx = -1;
      for (std::size_t k = 0; k < pairs.size(); ++k)
        if (pairs[k] == o) idx = static_cast<int>(k);
      smooth_to_pair.push_back(idx);
    }
  }
};

inline std::span<const double> pixel_span(const ImageBuffer& img, std::size_t p) {
  return {img.samples().data() + p * img.channels(), static_cast<std::size_t>(img.channels())};
}

}  // namespace detail

/// Assembles the linear system of one outer iteration for target channel
/// `channel`, with l and mu recomputed from u on the fly.
inline SparseSystem assemble(const ImageBuffer& u, const ImageBuffer& f, const ImageBuffer& g,
                             const SmoothConfig& cfg, int channel = 0) {
  cfg.validate();
  detail::check_inputs(u, f, g);
  if (channel < 0 || channel >= u.channels()) throw DimensionError("channel out of range");

  const detail::Stencils st(cfg);
  const int W = u.width(), H = u.height(), C = u.channels();
  const std::size_t n = u.pixel_count();
  const std::size_t K = st.pairs.size();
  const double ad = cfg.data_penalty.a, bd = cfg.data_penalty.b;
  const double as = cfg.smooth_penalty.a, bs = cfg.smooth_penalty.b;
  const double two_lambda = 2.0 * cfg.lambda;
  const auto& us = u.samples();
  const auto& fs = f.samples();

  SparseSystem sys;
  sys.width = W;
  sys.height = H;
  sys.pair_offsets = st.pairs;
  sys.diag.assign(n, 0.0);
  sys.offdiag.assign(n * K, 0.0);
  sys.rhs.assign(n, 0.0);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < H; ++y) {
    for (int x = 0; x < W; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      const double ui = us[i * C + channel];
      double diag = 0.0, rhs = 0.0;

      for (std::size_t k = 0; k < st.data.size(); ++k) {
        const Offset o = st.data[k];
        const int xj = x + o.dx, yj = y + o.dy;
        if (!in_bounds(xj, yj, W, H)) continue;
        const double fj = fs[(static_cast<std::size_t>(yj) * W + xj) * C + channel];
        const double grad = ui - fj;
        const double l = l_update(grad, bd);
        const double w = st.data_spatial[k] * detail::mu_update_unchecked(grad - l, ad);
        diag += w;
        rhs += w * (fj + l);
      }

      const auto gi = detail::pixel_span(g, i);
      for (std::size_t k = 0; k < st.smooth.size(); ++k) {
        const Offset o = st.smooth[k];
        const int xj = x + o.dx, yj = y + o.dy;
        if (!in_bounds(xj, yj, W, H)) continue;
        const std::size_t j = static_cast<std::size_t>(yj) * W + xj;
        const double grad = ui - us[j * C + channel];
        const double l = l_update(grad, bs);
        const double omega = st.smooth_spatial[k] *
                             guidance_weight(gi, detail::pixel_span(g, j), cfg.alpha, cfg.delta);
        const double w = two_lambda * omega * detail::mu_update_unchecked(grad - l, as);
        diag += w;
        rhs += w * l;
        if (const int p = st.smooth_to_pair[k]; p >= 0) sys.offdiag[i * K + p] = -w;
      }
      sys.diag[i] = diag;
      sys.rhs[i] = rhs;
    }
  }
  return sys;
}

// ---------------------------------------------------------------------------
// Per-pair auxiliary fields (materialized only for diagnostics and tests)

/// Values indexed by (pixel, channel, offset index); entries for neighbors
/// outside the image are present but ignored.
struct PairField {
  int channels = 1;
  std::size_t offsets = 0;
  std::vector<double> values;

  PairField() = default;
  PairField(std::size_t pixels, int ch, std::size_t k, double fill = 0.0)
      : channels(ch), offsets(k), values(pixels * ch * k, fill) {}

  double& at(std::size_t p, int c, std::size_t k) { return values[(p * channels + c) * offsets + k]; }
  double at(std::size_t p, int c, std::size_t k) const {
    return values[(p * channels + c) * offsets + k];
  }
};

struct AuxFields {
  PairField l_d, l_s, mu_d, mu_s;
};

namespace detail {

/// Visits every in-bounds ordered pair of both terms:
///   data(p, c, k, j, grad, spatial) and smooth(p, c, k, j, grad, omega).
template <typename DataFn, typename SmoothFn>
void for_each_pair(const ImageBuffer& u, const ImageBuffer& f, const ImageBuffer& g,
                   const SmoothConfig& cfg, const Stencils& st, DataFn&& data,
                   SmoothFn&& smooth) {
  const int W = u.width(), H = u.height(), C = u.channels();
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * W + x;
      for (std::size_t k = 0; k < st.data.size(); ++k) {
        const int xj = x + st.data[k].dx, yj = y + st.data[k].dy;
        if (!in_bounds(xj, yj, W, H)) continue;
        const std::size_t j = static_cast<std::size_t>(yj) * W + xj;
        for (int c = 0; c < C; ++c)
          data(i, c, k, j, u.samples()[i * C + c] - f.samples()[j * C + c], st.data_spatial[k]);
      }
      for (std::size_t k = 0; k < st.smooth.size(); ++k) {
        const int xj = x + st.smooth[k].dx, yj = y + st.smooth[k].dy;
        if (!in_bounds(xj, yj, W, H)) continue;
        const std::size_t j = static_cast<std::size_t>(yj) * W + xj;
        const double omega = st.smooth_spatial[k] *
                             guidance_weight(pixel_span(g, i), pixel_span(g, j), cfg.alpha,
                                             cfg.delta);
        for (int c = 0; c < C; ++c)
          smooth(i, c, k, j, u.samples()[i * C + c] - u.samples()[j * C + c], omega);
      }
    }
}

}  // namespace detail

/// Closed-form l (truncation split) and mu (half-quadratic weights) at u.
inline AuxFields compute_aux(const ImageBuffer& u, const ImageBuffer& f, const ImageBuffer& g,
                             const SmoothConfig& cfg) {
  cfg.validate();
  detail::check_inputs(u, f, g);
  const detail::Stencils st(cfg);
  const std::size_t n = u.pixel_count();
  const int C = u.channels();
  AuxFields aux{PairField(n, C, st.data.size()), PairField(n, C, st.smooth.size()),
                PairField(n, C, st.data.size(), 0.5 / cfg.data_penalty.a),
                PairField(n, C, st.smooth.size(), 0.5 / cfg.smooth_penalty.a)};
  detail::for_each_pair(
      u, f, g, cfg, st,
      [&](std::size_t i, int c, std::size_t k, std::size_t, double grad, double) {
        const double l = l_update(grad, cfg.data_penalty.b);
        aux.l_d.at(i, c, k) = l;
        aux.mu_d.at(i, c, k) = mu_update(grad - l, cfg.data_penalty.a);
      },
      [&](std::size_t i, int c, std::size_t k, std::size_t, double grad, double) {
        const double l = l_update(grad, cfg.smooth_penalty.b);
        aux.l_s.at(i, c, k) = l;
        aux.mu_s.at(i, c, k) = mu_update(grad - l, cfg.smooth_penalty.a);
      });
  return aux;
}

/// Truncated Huber objective, summed over all channels.
inline double energy_total(const ImageBuffer& u, const ImageBuffer& f, const ImageBuffer& g,
                           const SmoothConfig& cfg) {
  cfg.validate();
  detail::check_inputs(u, f, g);
  const detail::Stencils st(cfg);
  const double ad = cfg.data_penalty.a, bd = cfg.data_penalty.b;
  const double as = cfg.smooth_penalty.a, bs = cfg.smooth_penalty.b;
  double data = 0.0, smooth = 0.0;
  detail::for_each_pair(
      u, f, g, cfg, st,
      [&](std::size_t, int, std::size_t, std::size_t, double grad, double ws) {
        data += ws * detail::truncated_huber_unchecked(grad, ad, bd);
      },
      [&](std::size_t, int, std::size_t, std::size_t, double grad, double omega) {
        smooth += omega * detail::truncated_huber_unchecked(grad, as, bs);
      });
  return data + cfg.lambda * smooth;
}

/// Objective with the truncation split into Huber + L0 via explicit l fields.
inline double energy_aux(const ImageBuffer& u, const ImageBuffer& f, const ImageBuffer& g,
                         const PairField& l_d, const PairField& l_s, const SmoothConfig& cfg) {
  cfg.validate();
  detail::check_inputs(u, f, g);
  const detail::Stencils st(cfg);
  const auto [ad, bd] = cfg.data_penalty;
  const auto [as, bs] = cfg.smooth_penalty;
  double data = 0.0, smooth = 0.0;
  detail::for_each_pair(
      u, f, g, cfg, st,
      [&](std::size_t i, int c, std::size_t k, std::size_t, double grad, double ws) {
        const double l = l_d.at(i, c, k);
        data += ws * (huber(grad - l, ad) + (l != 0.0 ? bd - 0.5 * ad : 0.0));
      },
      [&](std::size_t i, int c, std::size_t k, std::size_t, double grad, double omega) {
        const double l = l_s.at(i, c, k);
        smooth += omega * (huber(grad - l, as) + (l != 0.0 ? bs - 0.5 * as : 0.0));
      });
  return data + cfg.lambda * smooth;
}

/// Multiplicative half-quadratic objective with explicit l and mu fields.
/// Throws std::domain_error for mu outside (0, 1/(2a)].
inline double energy_hq(const ImageBuffer& u, const ImageBuffer& f, const ImageBuffer& g,
                        const PairField& l_d, const PairField& l_s, const PairField& mu_d,
                        const PairField& mu_s, const SmoothConfig& cfg) {
  cfg.validate();
  detail::check_inputs(u, f, g);
  const detail::Stencils st(cfg);
  const auto [ad, bd] = cfg.data_penalty;
  const auto [as, bs] = cfg.smooth_penalty;
  double data = 0.0, smooth = 0.0;
  detail::for_each_pair(
      u, f, g, cfg, st,
      [&](std::size_t i, int c, std::size_t k, std::size_t, double grad, double ws) {
        const double l = l_d.at(i, c, k), mu = mu_d.at(i, c, k);
        const double r = grad - l;
        data += ws * (mu * r * r + psi(mu, ad) + (l != 0.0 ? bd - 0.5 * ad : 0.0));
      },
      [&](std::size_t i, int c, std::size_t k, std::size_t, double grad, double omega) {
        const double l = l_s.at(i, c, k), mu = mu_s.at(i, c, k);
        const double r = grad - l;
        smooth += omega * (mu * r * r + psi(mu, as) + (l != 0.0 ? bs - 0.5 * as : 0.0));
      });
  return data + cfg.lambda * smooth;
}

}  // namespace gsmooth
