#pragma once

// Command-line front end: argument parsing into a JobSpec and job execution.
// Exit codes: 0 success, 1 runtime or solver failure, 2 usage error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gsmooth/apps.hpp"
#include "gsmooth/bench.hpp"
#include "gsmooth/io.hpp"
#include "gsmooth/metrics.hpp"

namespace gsmooth::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown by parse_args for -h/--help; carries the rendered help text.
struct HelpRequested {
  std::string text;
};

enum class Command { kSmooth, kEnhance, kTonemap, kClipart, kUpsample, kJointFilter, kTexture,
                     kMetrics, kBench };

struct JobSpec {
  Command command = Command::kSmooth;
  std::vector<std::string> inputs;
  std::optional<std::string> guide;
  std::optional<std::string> output;
  std::optional<Mode> mode;
  PresetOverrides overrides;
  std::optional<double> boost;
  std::optional<double> compression;
  std::optional<int> quality;
  std::optional<int> factor;
  std::optional<std::string> trace;
  int bit_depth = 8;
  // metrics
  std::optional<std::string> mask;
  double peak = 1.0;
  std::optional<std::string> image_id;
  // bench
  std::vector<std::string> resolutions;
  std::vector<std::string> bench_modes;
  std::optional<std::string> speedup_out;
  std::optional<std::string> dataset;
  double depth_scale = 255.0;
};

namespace detail {

struct Flags {
  std::string mode;
  std::optional<double> lambda, alpha, ad, bd, as, bs, tol;
  std::optional<int> rd, rs, stride, iters, maxiter;
};

inline void add_param_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--mode", f.mode, "Preset: sp1, sp2, ep1, ep2, epsp")
      ->check(CLI::IsMember({"sp1", "sp2", "ep1", "ep2", "epsp"}));
  sub->add_option("--lambda", f.lambda, "Smoothing strength");
  sub->add_option("--alpha", f.alpha, "Guidance sensitivity");
  sub->add_option("--ad", f.ad, "Data term quadratic knee a_d");
  sub->add_option("--bd", f.bd, "Data term truncation b_d");
  sub->add_option("--as", f.as, "Smoothness term quadratic knee a_s");
  sub->add_option("--bs", f.bs, "Smoothness term truncation b_s");
  sub->add_option("--rd", f.rd, "Data neighborhood radius");
  sub->add_option("--rs", f.rs, "Smoothness neighborhood radius");
  sub->add_option("--stride", f.stride, "Dilated neighborhood stride");
  sub->add_option("--iters", f.iters, "Outer iterations");
  sub->add_option("--tol", f.tol, "Linear solver relative tolerance");
  sub->add_option("--maxiter", f.maxiter, "Linear solver iteration cap");
}

inline void store_flags(const Flags& f, JobSpec& job) {
  if (!f.mode.empty()) job.mode = parse_mode(f.mode);
  PresetOverrides& ov = job.overrides;
  ov.lambda = f.lambda;
  ov.alpha = f.alpha;
  ov.a_d = f.ad;
  ov.b_d = f.bd;
  ov.a_s = f.as;
  ov.b_s = f.bs;
  ov.r_d = f.rd;
  ov.r_s = f.rs;
  ov.stride = f.stride;
  ov.iterations = f.iters;
  ov.linsolve_tol = f.tol;
  ov.linsolve_maxiter = f.maxiter;
}

}  // namespace detail

/// Parses argv (argv[0] is the program name). Throws UsageError on any
/// malformed, unknown or missing argument. `--help` throws HelpRequested.
inline JobSpec parse_args(int argc, const char* const* argv) {
  CLI::App app{"Truncated-Huber edge/structure-preserving image smoothing", "gsmooth"};
  app.require_subcommand(1);
  JobSpec job;
  detail::Flags flags;
  std::vector<std::string> inputs;
  std::string output, guide, trace, mask, image_id, speedup_out, dataset;
  std::optional<double> boost, compression;
  std::optional<int> quality, factor;
  std::string resolutions, bench_modes;

  struct Sub {
    Command cmd;
    const char* name;
    const char* help;
    std::size_t min_inputs;
    std::size_t max_inputs;
  };
  const Sub subs[] = {
      {Command::kSmooth, "smooth", "Smooth an image with a preset or explicit parameters", 1, 1},
      {Command::kEnhance, "enhance", "Detail enhancement (base + k * detail)", 1, 1},
      {Command::kTonemap, "tonemap", "HDR tone mapping of a PFM radiance map", 1, 1},
      {Command::kClipart, "clipart", "Clip-art compression artifact removal", 1, 1},
      {Command::kUpsample, "upsample", "Guided depth map upsampling", 1, 1},
      {Command::kJointFilter, "jointfilter", "Joint (flash/no-flash) filtering", 1, 1},
      {Command::kTexture, "texture", "Texture removal (SP-1)", 1, 1},
      {Command::kMetrics, "metrics", "PSNR/SSIM/MAE between a reference and a test image", 2, 2},
      {Command::kBench, "bench", "Timing harness and depth dataset evaluation", 0, 1},
  };

  std::vector<std::pair<CLI::App*, Command>> registered;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    registered.emplace_back(sub, s.cmd);
    auto* in = sub->add_option("inputs", inputs, "Input image(s)");
    if (s.min_inputs > 0) in->required()->expected(static_cast<int>(s.min_inputs),
                                                   static_cast<int>(s.max_inputs));
    else in->expected(0, static_cast<int>(s.max_inputs));
    sub->add_option("-o,--output", output, "Output path");
    if (s.cmd == Command::kMetrics) {
      sub->add_option("--mask", mask, "Mask image (nonzero = evaluated)");
      sub->add_option("--peak", job.peak, "Peak value for PSNR/SSIM");
      sub->add_option("--id", image_id, "Image id written in the CSV");
      continue;
    }
    if (s.cmd == Command::kBench) {
      sub->add_option("--resolutions", resolutions, "Comma-separated: qvga,vga,720p,1080p,2k");
      sub->add_option("--modes", bench_modes, "Comma-separated presets to time");
      sub->add_option("--speedup-out", speedup_out, "CSV of the s=1 vs s=2 speedup at r=5");
      sub->add_option("--dataset", dataset, "Depth dataset manifest (id,depth_lr,guide,gt,factor)");
      sub->add_option("--depth-scale", job.depth_scale, "Native depth units per normalized unit");
    }
    detail::add_param_flags(sub, flags);
    sub->add_option("--guide", guide, "Guidance image");
    sub->add_option("--boost", boost, "Detail boost factor k");
    sub->add_option("--compression", compression, "Base compression factor in (0,1]");
    sub->add_option("--quality", quality, "JPEG quality of the clip-art input (10..90)");
    sub->add_option("--factor", factor, "Upsampling factor");
    sub->add_option("--trace", trace, "CSV of the energy per outer iteration");
    sub->add_option("--bit-depth", job.bit_depth, "Output bit depth (8 or 16)")
        ->check(CLI::IsMember({8, 16}));
  }

  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    for (auto& [sub, cmd] : registered)
      if (sub->parsed()) throw HelpRequested{sub->help()};
    throw HelpRequested{app.help()};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  for (auto& [sub, cmd] : registered)
    if (sub->parsed()) job.command = cmd;

  detail::store_flags(flags, job);
  job.inputs = inputs;
  if (!output.empty()) job.output = output;
  if (!guide.empty()) job.guide = guide;
  if (!trace.empty()) job.trace = trace;
  if (!mask.empty()) job.mask = mask;
  if (!image_id.empty()) job.image_id = image_id;
  if (!speedup_out.empty()) job.speedup_out = speedup_out;
  if (!dataset.empty()) job.dataset = dataset;
  job.boost = boost;
  job.compression = compression;
  job.quality = quality;
  job.factor = factor;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string t; std::getline(ss, t, ',');)
      if (!t.empty()) out.push_back(t);
    return out;
  };
  job.resolutions = split(resolutions);
  job.bench_modes = split(bench_modes);

  // Per-command requirements.
  const bool image_job = job.command != Command::kMetrics && job.command != Command::kBench;
  if (image_job && !job.output) throw UsageError("missing required -o/--output");
  switch (job.command) {
    case Command::kSmooth:
      if (!job.overrides.lambda) throw UsageError("smooth requires --lambda");
      break;
    case Command::kEnhance:
    case Command::kTonemap:
    case Command::kTexture:
      if (!job.overrides.lambda) throw UsageError("missing required --lambda");
      break;
    case Command::kUpsample:
      if (!job.guide) throw UsageError("upsample requires --guide");
      if (!job.factor) throw UsageError("upsample requires --factor");
      break;
    case Command::kJointFilter:
      if (!job.guide) throw UsageError("jointfilter requires --guide");
      break;
    case Command::kClipart:
      if (!job.quality && !job.mode) throw UsageError("clipart requires --quality or --mode");
      break;
    case Command::kBench:
      if (!job.dataset && job.resolutions.empty() && job.inputs.empty())
        throw UsageError("bench requires a corpus directory, --resolutions or --dataset");
      for (const std::string& m : job.bench_modes)
        if (!parse_mode(m)) throw UsageError("unknown mode '" + m + "' in --modes");
      break;
    case Command::kMetrics:
      break;
  }
  return job;
}

inline JobSpec parse_args(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"gsmooth"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  return parse_args(static_cast<int>(argv.size()), argv.data());
}

/// Builds the smoothing configuration for a job. Presets reject overrides of
/// the fields they pin; without --mode every flag applies on top of SP-1
/// defaults.
inline SmoothConfig build_config(const JobSpec& job, std::optional<Mode> default_mode) {
  const std::optional<Mode> mode = job.mode ? job.mode : default_mode;
  if (mode) return mode_preset(*mode, job.overrides);

  SmoothConfig cfg = mode_preset(Mode::kSP1);
  cfg.mode.reset();
  const PresetOverrides& ov = job.overrides;
  if (ov.lambda) cfg.lambda = *ov.lambda;
  if (ov.alpha) cfg.alpha = *ov.alpha;
  if (ov.a_d) cfg.data_penalty.a = *ov.a_d;
  if (ov.b_d) cfg.data_penalty.b = *ov.b_d;
  if (ov.a_s) cfg.smooth_penalty.a = *ov.a_s;
  if (ov.b_s) cfg.smooth_penalty.b = *ov.b_s;
  if (ov.r_d) cfg.data_nbr.radius = *ov.r_d;
  if (ov.r_s) cfg.smooth_nbr.radius = *ov.r_s;
  if (ov.stride) {
    cfg.smooth_nbr.stride = *ov.stride;
    if (cfg.data_nbr.radius > 0) cfg.data_nbr.stride = *ov.stride;
  }
  if (ov.iterations) cfg.iterations = *ov.iterations;
  if (ov.linsolve_tol) cfg.linsolve_tol = *ov.linsolve_tol;
  if (ov.linsolve_maxiter) cfg.linsolve_maxiter = *ov.linsolve_maxiter;
  cfg.validate();
  return cfg;
}

namespace detail {

inline void write_trace(const std::string& path, const std::vector<double>& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace '" + path + "'");
  out.precision(17);
  out << "iteration,energy\n";
  for (std::size_t k = 0; k < trace.size(); ++k) out << k << ',' << trace[k] << '\n';
}

inline void warn_unconverged(const std::vector<SolveReport>& reports, std::ostream& err) {
  for (std::size_t i = 0; i < reports.size(); ++i)
    if (!reports[i].converged)
      err << "warning: linear solve " << i << " stopped at relative residual "
          << reports[i].final_relative_residual << '\n';
}

/// Applies the preset-independent parts of the overrides to a scheduled config.
inline SmoothConfig apply_numeric(SmoothConfig cfg, const PresetOverrides& ov) {
  if (ov.linsolve_tol) cfg.linsolve_tol = *ov.linsolve_tol;
  if (ov.linsolve_maxiter) cfg.linsolve_maxiter = *ov.linsolve_maxiter;
  return cfg;
}

inline std::vector<Mode> parse_modes(const std::vector<std::string>& names) {
  std::vector<Mode> out;
  for (const std::string& n : names) out.push_back(*parse_mode(n));
  return out;
}

}  // namespace detail

/// Executes a parsed job. Returns the process exit code; diagnostics go to `err`.
inline int run_job(const JobSpec& job, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    // Load and validate every referenced input before any computation.
    std::vector<ImageBuffer> inputs;
    if (job.command != Command::kBench)
      for (const std::string& p : job.inputs) inputs.push_back(read_image(p));
    std::optional<ImageBuffer> guide;
    if (job.guide) guide = read_image(*job.guide);

    WriteOptions wopt;
    wopt.bit_depth = job.bit_depth;
    auto emit = [&](const ImageBuffer& img) { write_image(*job.output, img, wopt); };

    switch (job.command) {
      case Command::kSmooth: {
        const SmoothConfig cfg = build_config(job, std::nullopt);
        const ImageBuffer& g = guide ? *guide : inputs[0];
        const SmoothResult r = smooth(inputs[0], g, cfg);
        detail::warn_unconverged(r.solve_reports, err);
        if (job.trace) detail::write_trace(*job.trace, r.energy_trace);
        emit(r.output);
        break;
      }
      case Command::kEnhance: {
        const SmoothConfig cfg = build_config(job, Mode::kSP2);
        emit(detail_enhance(inputs[0], cfg, job.boost.value_or(3.0)));
        break;
      }
      case Command::kTonemap: {
        const SmoothConfig cfg = build_config(job, Mode::kSP2);
        emit(tone_map(inputs[0], cfg, job.compression.value_or(0.5)));
        break;
      }
      case Command::kClipart: {
        const SmoothConfig cfg = job.quality && !job.mode
                                     ? detail::apply_numeric(clipart_config(*job.quality), job.overrides)
                                     : build_config(job, std::nullopt);
        const SmoothResult r = smooth(inputs[0], inputs[0], cfg);
        if (job.trace) detail::write_trace(*job.trace, r.energy_trace);
        emit(r.output);
        break;
      }
      case Command::kUpsample: {
        SmoothConfig cfg;
        if (job.mode) {
          cfg = build_config(job, std::nullopt);
        } else {
          cfg = detail::apply_numeric(upsample_config(*job.factor, job.overrides.stride.value_or(1)),
                                      job.overrides);
        }
        emit(guided_upsample(inputs[0], *guide, *job.factor, cfg));
        break;
      }
      case Command::kJointFilter: {
        JobSpec j = job;
        if (!j.mode) {
          // Flash/no-flash defaults: r = 1, lambda = 0.1, b = 0.15.
          j.mode = Mode::kEPSP;
          if (!j.overrides.lambda) j.overrides.lambda = 0.1;
          if (!j.overrides.b_d) j.overrides.b_d = 0.15;
          if (!j.overrides.b_s) j.overrides.b_s = 0.15;
        }
        emit(joint_filter(inputs[0], *guide, build_config(j, std::nullopt)));
        break;
      }
      case Command::kTexture: {
        JobSpec j = job;
        j.mode = Mode::kSP1;
        const SmoothResult r = smooth(inputs[0], inputs[0], build_config(j, std::nullopt));
        if (job.trace) detail::write_trace(*job.trace, r.energy_trace);
        emit(r.output);
        break;
      }
      case Command::kMetrics: {
        std::optional<Mask> mask;
        if (job.mask) {
          const ImageBuffer m = read_image(*job.mask);
          mask = Mask{m.width(), m.height(), std::vector<bool>(m.pixel_count())};
          for (std::size_t p = 0; p < m.pixel_count(); ++p)
            mask->keep[p] = m.samples()[p * m.channels()] > 0.0;
        }
        const std::string id = job.image_id.value_or(job.inputs[1]);
        SsimParams sp;
        sp.peak = job.peak;
        const std::vector<MetricRow> rows = {
            {id, "psnr", psnr(inputs[0], inputs[1], job.peak)},
            {id, "ssim", ssim(inputs[0], inputs[1], sp)},
            {id, "mae", mae(inputs[0], inputs[1], mask)}};
        if (job.output) {
          std::ofstream f(*job.output);
          write_metrics_csv(f, rows);
        } else {
          write_metrics_csv(out, rows);
        }
        break;
      }
      case Command::kBench: {
        std::ofstream file;
        if (job.output) {
          file.open(*job.output);
          if (!file) throw std::runtime_error("cannot write '" + *job.output + "'");
        }
        std::ostream& dst = job.output ? static_cast<std::ostream&>(file) : out;
        if (job.dataset) {
          const auto rows =
              run_dataset(read_manifest(*job.dataset), job.depth_scale, job.overrides.stride.value_or(1));
          write_dataset_csv(dst, rows);
          break;
        }
        BenchOptions opt;
        if (!job.inputs.empty()) opt.corpus_dir = job.inputs[0];
        opt.resolutions = job.resolutions.empty() ? std::vector<std::string>{"qvga", "vga", "720p", "1080p", "2k"}
                                                  : job.resolutions;
        opt.modes = job.bench_modes.empty()
                        ? std::vector<Mode>{Mode::kSP1, Mode::kSP2, Mode::kEP1, Mode::kEP2, Mode::kEPSP}
                        : detail::parse_modes(job.bench_modes);
        opt.lambda = job.overrides.lambda.value_or(1.0);
        opt.radius = job.overrides.r_s.value_or(1);
        opt.stride = job.overrides.stride.value_or(1);
        opt.speedup = job.speedup_out.has_value();
        const BenchReport report = run_bench(opt);
        for (const std::string& w : report.warnings) err << "warning: " << w << '\n';
        write_bench_csv(dst, report.rows);
        if (job.speedup_out) {
          std::ofstream s(*job.speedup_out);
          write_speedup_csv(s, report.speedups);
        }
        break;
      }
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

/// Full entry point: parse, run, map errors to exit codes.
inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
  JobSpec job;
  try {
    job = parse_args(argc, argv);
  } catch (const HelpRequested& h) {
    out << h.text;
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }
  return run_job(job, out, err);
}

}  // namespace gsmooth::cli
