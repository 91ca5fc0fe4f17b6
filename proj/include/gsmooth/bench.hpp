#pragma once

// Timing harness and the user-supplied depth dataset evaluation.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gsmooth/apps.hpp"
#include "gsmooth/io.hpp"
#include "gsmooth/metrics.hpp"

namespace gsmooth {

struct Resolution {
  std::string name;
  int width = 0;
  int height = 0;
};

inline const std::vector<Resolution>& standard_resolutions() {
  static const std::vector<Resolution> kAll = {
      {"qvga", 320, 240}, {"vga", 640, 480}, {"720p", 1280, 720},
      {"1080p", 1920, 1080}, {"2k", 2048, 1080}};
  return kAll;
}

inline std::optional<Resolution> find_resolution(const std::string& name) {
  for (const Resolution& r : standard_resolutions())
    if (r.name == name) return r;
  return std::nullopt;
}

/// Deterministic piecewise-smooth color test image: rectangles and a disc
/// over a gradient, plus mild noise.
inline ImageBuffer synthetic_scene(int width, int height, unsigned seed = 7) {
  ImageBuffer img(width, height, 3, 0.0);
  std::mt19937 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.02);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double u = static_cast<double>(x) / width, v = static_cast<double>(y) / height;
      double rgb[3] = {0.2 + 0.3 * u, 0.3 + 0.2 * v, 0.5};
      if (u > 0.15 && u < 0.45 && v > 0.2 && v < 0.7) rgb[0] = 0.8, rgb[1] = 0.3, rgb[2] = 0.2;
      const double dx = u - 0.7, dy = v - 0.5;
      if (dx * dx + dy * dy < 0.04) rgb[0] = 0.1, rgb[1] = 0.6, rgb[2] = 0.9;
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = rgb[c] + noise(rng);
    }
  return img;
}

struct BenchOptions {
  std::filesystem::path corpus_dir;
  std::vector<std::string> resolutions;  // names from standard_resolutions()
  std::vector<Mode> modes;
  double lambda = 1.0;
  int radius = 1;   // r_d = r_s for the modes that leave radii free
  int stride = 1;
  bool speedup = false;  // also time EP&SP r=5 with s=1 vs s=2
};

struct BenchRow {
  std::string resolution;
  std::string mode;
  int stride = 1;
  int width = 0;
  int height = 0;
  double seconds = 0.0;
};

struct SpeedupRow {
  std::string resolution;
  int radius = 5;
  double seconds_s1 = 0.0;
  double seconds_s2 = 0.0;
  double ratio = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<SpeedupRow> speedups;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::optional<ImageBuffer> load_corpus_image(const std::filesystem::path& dir,
                                                    const std::string& name) {
  if (dir.empty()) return std::nullopt;
  for (const char* ext : {".png", ".ppm", ".pgm"}) {
    const auto p = dir / (name + ext);
    if (std::filesystem::exists(p)) return read_image(p);
  }
  return std::nullopt;
}

inline double time_smooth(const ImageBuffer& img, const SmoothConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  (void)smooth(img, img, cfg);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline SmoothConfig bench_config(Mode m, const BenchOptions& opt) {
  PresetOverrides ov;
  ov.lambda = opt.lambda;
  if (m == Mode::kEP2 || m == Mode::kEPSP) {
    ov.r_s = opt.radius;
    ov.stride = opt.stride;
    if (m == Mode::kEPSP) ov.r_d = opt.radius;
  }
  return mode_preset(m, ov);
}

}  // namespace detail

/// Times smooth() per (resolution, mode). Missing corpus images are
/// synthesized; unknown resolution names are skipped with a warning.
inline BenchReport run_bench(const BenchOptions& opt) {
  BenchReport report;
  for (const std::string& name : opt.resolutions) {
    const auto res = find_resolution(name);
    if (!res) {
      report.warnings.push_back("unknown resolution '" + name + "', skipped");
      continue;
    }
    std::optional<ImageBuffer> img = detail::load_corpus_image(opt.corpus_dir, name);
    if (!img) {
      if (!opt.corpus_dir.empty())
        report.warnings.push_back("no corpus image for " + name + ", using a synthetic one");
      img = synthetic_scene(res->width, res->height);
    }
    for (Mode m : opt.modes) {
      const SmoothConfig cfg = detail::bench_config(m, opt);
      report.rows.push_back({name, std::string(mode_name(m)), cfg.smooth_nbr.stride, img->width(),
                             img->height(), detail::time_smooth(*img, cfg)});
    }
    if (opt.speedup) {
      BenchOptions o = opt;
      o.radius = 5;
      o.stride = 1;
      const double t1 = detail::time_smooth(*img, detail::bench_config(Mode::kEPSP, o));
      o.stride = 2;
      const double t2 = detail::time_smooth(*img, detail::bench_config(Mode::kEPSP, o));
      report.speedups.push_back({name, 5, t1, t2, t2 > 0.0 ? t1 / t2 : 0.0});
    }
  }
  return report;
}

inline void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "resolution,width,height,mode,stride,seconds\n";
  for (const BenchRow& r : rows)
    os << r.resolution << ',' << r.width << ',' << r.height << ',' << r.mode << ',' << r.stride
       << ',' << r.seconds << '\n';
}

inline void write_speedup_csv(std::ostream& os, const std::vector<SpeedupRow>& rows) {
  os << "resolution,radius,seconds_s1,seconds_s2,speedup\n";
  for (const SpeedupRow& r : rows)
    os << r.resolution << ',' << r.radius << ',' << r.seconds_s1 << ',' << r.seconds_s2 << ','
       << r.ratio << '\n';
}

// ---------------------------------------------------------------------------
// Depth upsampling dataset harness

struct DatasetEntry {
  std::string id;
  std::filesystem::path depth_lr;
  std::filesystem::path guide;
  std::filesystem::path ground_truth;
  int factor = 8;
};

struct DatasetRow {
  std::string id;
  int factor = 0;
  double mae = 0.0;
};

/// Reads `id,depth_lr,guide,gt,factor` rows (header required); relative
/// paths resolve against the manifest's directory.
inline std::vector<DatasetEntry> read_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw std::runtime_error("cannot open manifest '" + manifest.string() + "'");
  const auto base = manifest.parent_path();
  std::string line;
  std::getline(in, line);
  if (line.rfind("id,depth_lr,guide,gt,factor", 0) != 0)
    throw std::runtime_error("manifest header must be id,depth_lr,guide,gt,factor");
  std::vector<DatasetEntry> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string col; std::getline(ss, col, ',');) cols.push_back(col);
    if (cols.size() != 5)
      throw std::runtime_error("manifest line " + std::to_string(lineno) + ": expected 5 columns");
    DatasetEntry e;
    e.id = cols[0];
    e.depth_lr = base / cols[1];
    e.guide = base / cols[2];
    e.ground_truth = base / cols[3];
    try {
      e.factor = std::stoi(cols[4]);
    } catch (const std::exception&) {
      throw std::runtime_error("manifest line " + std::to_string(lineno) + ": bad factor");
    }
    out.push_back(std::move(e));
  }
  return out;
}

/// Upsamples every manifest entry with the per-factor schedule and reports
/// MAE in native depth units (normalized error times `depth_scale`).
inline std::vector<DatasetRow> run_dataset(const std::vector<DatasetEntry>& entries,
                                           double depth_scale = 255.0, int stride = 1) {
  std::vector<DatasetRow> rows;
  for (const DatasetEntry& e : entries) {
    const ImageBuffer lr = read_image(e.depth_lr);
    const ImageBuffer guide = read_image(e.guide);
    const ImageBuffer gt = read_image(e.ground_truth);
    const ImageBuffer up = guided_upsample(lr, guide, e.factor, upsample_config(e.factor, stride));
    rows.push_back({e.id, e.factor, mae(up, gt) * depth_scale});
  }
  return rows;
}

inline void write_dataset_csv(std::ostream& os, const std::vector<DatasetRow>& rows) {
  os << "image,factor,mae\n";
  for (const DatasetRow& r : rows) os << r.id << ',' << r.factor << ',' << format_metric(r.mae) << '\n';
}

}  // namespace gsmooth
