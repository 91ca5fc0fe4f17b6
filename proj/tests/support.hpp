#pragma once

// Helpers shared by the test binaries: random images and dense oracles.

#include <Eigen/Dense>

#include <random>

#include "gsmooth/gsmooth.hpp"

namespace gsmooth::testing {

inline ImageBuffer random_image(int w, int h, int c, unsigned seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  ImageBuffer img(w, h, c, 0.0);
  for (double& v : img.samples()) v = u(rng);
  return img;
}

/// Materializes M column by column through multiply(), independently of the
/// storage layout.
inline Eigen::MatrixXd dense_from_multiply(const SparseSystem& sys) {
  const std::size_t n = sys.n();
  Eigen::MatrixXd m(n, n);
  std::vector<double> e(n, 0.0), col(n);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    sys.multiply(e, col);
    for (std::size_t i = 0; i < n; ++i) m(i, j) = col[i];
    e[j] = 0.0;
  }
  return m;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<SmoothConfig> all_presets(double lambda = 0.5) {
  std::vector<SmoothConfig> out;
  for (Mode m : {Mode::kSP1, Mode::kSP2, Mode::kEP1, Mode::kEP2, Mode::kEPSP}) {
    PresetOverrides ov;
    ov.lambda = lambda;
    out.push_back(mode_preset(m, ov));
  }
  return out;
}

/// Dense matrix and right-hand side of the linear system written directly
/// from the pair formulas, using explicit l and mu fields (single channel).
struct DenseSystem {
  Eigen::MatrixXd m;
  Eigen::VectorXd rhs;
};

inline DenseSystem dense_reference(const ImageBuffer& u, const ImageBuffer& f, const ImageBuffer& g,
                                   const SmoothConfig& cfg, const AuxFields& aux) {
  const int W = u.width(), H = u.height();
  const int n = W * H;
  DenseSystem d{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  const OffsetSet data = dilated_offsets(cfg.data_nbr);
  const OffsetSet sm = dilated_offsets(cfg.smooth_nbr);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const int i = y * W + x;
      for (std::size_t k = 0; k < data.size(); ++k) {
        const int xj = x + data[k].dx, yj = y + data[k].dy;
        if (xj < 0 || yj < 0 || xj >= W || yj >= H) continue;
        const int j = yj * W + xj;
        const double d2 = double(data[k].dx) * data[k].dx + double(data[k].dy) * data[k].dy;
        const double sd = cfg.data_sigma();
        const double ws = d2 == 0.0 ? 1.0 : std::exp(-d2 / (2 * sd * sd));
        const double w = ws * aux.mu_d.at(i, 0, k);
        d.m(i, i) += w;
        d.rhs(i) += w * (f.samples()[j] + aux.l_d.at(i, 0, k));
      }
      for (std::size_t k = 0; k < sm.size(); ++k) {
        const int xj = x + sm[k].dx, yj = y + sm[k].dy;
        if (xj < 0 || yj < 0 || xj >= W || yj >= H) continue;
        const int j = yj * W + xj;
        const double d2 = double(sm[k].dx) * sm[k].dx + double(sm[k].dy) * sm[k].dy;
        const double ss = cfg.smooth_sigma();
        double gd2 = 0.0;
        for (int c = 0; c < g.channels(); ++c) {
          const double t = g.samples()[i * g.channels() + c] - g.samples()[j * g.channels() + c];
          gd2 += t * t;
        }
        const double wg = 1.0 / (std::pow(std::sqrt(gd2), cfg.alpha) + cfg.delta);
        const double w = 2 * cfg.lambda * std::exp(-d2 / (2 * ss * ss)) * wg * aux.mu_s.at(i, 0, k);
        d.m(i, i) += w;
        d.m(i, j) -= w;
        d.rhs(i) += w * aux.l_s.at(i, 0, k);
      }
    }
  return d;
}

}  // namespace gsmooth::testing
