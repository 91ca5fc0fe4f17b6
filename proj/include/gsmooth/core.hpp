#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gsmooth {

// ---------------------------------------------------------------------------
// Errors

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// ImageBuffer

/// Intensity interpretation of the samples held by an ImageBuffer.
enum class SampleRange {
  kNormalized,    ///< display-referred, nominally in [0,1]
  kLogLuminance,  ///< log-domain HDR data, unbounded
  kLinear,        ///< linear radiance (PFM input), positive and unbounded
};

/// Row-major, channel-interleaved floating-point raster.
class ImageBuffer {
 public:
  ImageBuffer() = default;

  ImageBuffer(int width, int height, int channels, double fill = 0.0,
              SampleRange range = SampleRange::kNormalized)
      : width_(width), height_(height), channels_(channels), range_(range) {
    if (width <= 0 || height <= 0 || channels <= 0)
      throw DimensionError("image dimensions must be positive");
    samples_.assign(size(), fill);
  }

  ImageBuffer(int width, int height, int channels, std::vector<double> samples,
              SampleRange range = SampleRange::kNormalized)
      : width_(width), height_(height), channels_(channels), range_(range),
        samples_(std::move(samples)) {
    if (width <= 0 || height <= 0 || channels <= 0)
      throw DimensionError("image dimensions must be positive");
    if (samples_.size() != size())
      throw DimensionError("sample count does not match width*height*channels");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  std::size_t size() const { return pixel_count() * static_cast<std::size_t>(channels_); }
  bool empty() const { return samples_.empty(); }

  SampleRange range() const { return range_; }
  void set_range(SampleRange r) { range_ = r; }

  double& at(int x, int y, int c = 0) { return samples_[index(x, y, c)]; }
  double at(int x, int y, int c = 0) const { return samples_[index(x, y, c)]; }

  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  std::vector<double>& samples() { return samples_; }
  const std::vector<double>& samples() const { return samples_; }

  bool same_shape(const ImageBuffer& o) const {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }
  bool same_extent(const ImageBuffer& o) const {
    return width_ == o.width_ && height_ == o.height_;
  }

  bool all_finite() const {
    for (double v : samples_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  /// Copies one channel into a single-channel buffer.
  ImageBuffer channel(int c) const {
    ImageBuffer out(width_, height_, 1, 0.0, range_);
    for (std::size_t p = 0; p < pixel_count(); ++p)
      out.samples_[p] = samples_[p * channels_ + c];
    return out;
  }

  void set_channel(int c, const ImageBuffer& plane) {
    if (!same_extent(plane) || plane.channels() != 1)
      throw DimensionError("channel plane does not match image extent");
    for (std::size_t p = 0; p < pixel_count(); ++p)
      samples_[p * channels_ + c] = plane.samples_[p];
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  SampleRange range_ = SampleRange::kNormalized;
  std::vector<double> samples_;
};

// ---------------------------------------------------------------------------
// Parameters

/// Smallest quadratic knee; also the value used for the "a = epsilon" cells.
inline constexpr double kEpsilon = 1e-3;

/// Stand-in for thresholds that must exceed the maximum normalized intensity.
inline constexpr double kAboveRange = 2.0;

/// (a, b) of one truncated Huber penalty: quadratic knee and truncation point.
struct TruncatedHuberParams {
  double a = kEpsilon;
  double b = kAboveRange;

  void validate(std::string_view what = "penalty") const {
    if (!(a > 0.0) || !std::isfinite(a))
      throw std::domain_error(std::string(what) + ": a must be positive");
    if (!(b >= a) || !std::isfinite(b))
      throw std::domain_error(std::string(what) + ": requires a <= b");
  }

  friend bool operator==(const TruncatedHuberParams&, const TruncatedHuberParams&) = default;
};

struct NeighborhoodSpec {
  int radius = 1;
  int stride = 1;
  bool include_center = false;

  void validate(std::string_view what = "neighborhood") const {
    if (radius < 0) throw ConfigError(std::string(what) + ": radius must be >= 0");
    if (stride < 1) throw ConfigError(std::string(what) + ": stride must be >= 1");
    if (radius == 0 && stride != 1)
      throw ConfigError(std::string(what) + ": stride must be 1 when radius is 0");
    if (radius > 0 && stride > 2 * radius + 1)
      throw ConfigError(std::string(what) + ": stride exceeds 2r+1");
  }

  friend bool operator==(const NeighborhoodSpec&, const NeighborhoodSpec&) = default;
};

enum class Mode { kSP1, kSP2, kEP1, kEP2, kEPSP };

inline std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::kSP1: return "sp1";
    case Mode::kSP2: return "sp2";
    case Mode::kEP1: return "ep1";
    case Mode::kEP2: return "ep2";
    case Mode::kEPSP: return "epsp";
  }
  return "?";
}

inline std::optional<Mode> parse_mode(std::string_view s) {
  for (Mode m : {Mode::kSP1, Mode::kSP2, Mode::kEP1, Mode::kEP2, Mode::kEPSP})
    if (mode_name(m) == s) return m;
  return std::nullopt;
}

/// Full parameter bundle of one smoothing run.
struct SmoothConfig {
  double lambda = 1.0;
  double alpha = 0.5;
  double delta = 1e-3;
  TruncatedHuberParams data_penalty{};
  TruncatedHuberParams smooth_penalty{};
  NeighborhoodSpec data_nbr{1, 1, true};
  NeighborhoodSpec smooth_nbr{1, 1, false};
  int iterations = 10;
  // Gaussian widths; when unset they follow the neighborhood radii.
  std::optional<double> sigma_d;
  std::optional<double> sigma_s;
  double linsolve_tol = 1e-6;
  int linsolve_maxiter = 2000;

  // Stop once the relative energy change drops below 1e-6.
  bool early_stop = false;
  // Check every link of the descent chain each iteration (slow).
  bool verify_descent = false;

  // Preset this configuration was built from, if any.
  std::optional<Mode> mode;

  double data_sigma() const { return sigma_d.value_or(static_cast<double>(data_nbr.radius)); }
  double smooth_sigma() const {
    return sigma_s.value_or(static_cast<double>(smooth_nbr.radius));
  }

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be >= 0");
    if (!(delta > 0.0)) throw ConfigError("delta must be positive");
    try {
      data_penalty.validate("data penalty");
      smooth_penalty.validate("smoothness penalty");
    } catch (const std::domain_error& e) {
      throw ConfigError(e.what());
    }
    data_nbr.validate("data neighborhood");
    smooth_nbr.validate("smoothness neighborhood");
    if (!data_nbr.include_center) throw ConfigError("data neighborhood must include the center");
    if (smooth_nbr.include_center)
      throw ConfigError("smoothness neighborhood must exclude the center");
    if (smooth_nbr.radius < 1) throw ConfigError("smoothness radius must be >= 1");
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (sigma_d && !(*sigma_d > 0.0)) throw ConfigError("sigma_d must be positive");
    if (sigma_s && !(*sigma_s > 0.0)) throw ConfigError("sigma_s must be positive");
    if (!(linsolve_tol > 0.0)) throw ConfigError("linsolve_tol must be positive");
    if (linsolve_maxiter < 1) throw ConfigError("linsolve_maxiter must be positive");
  }
};

// ---------------------------------------------------------------------------
// Presets

/// Values a caller may supply on top of a preset. Everything a preset pins is
/// rejected with a ConfigError naming the field.
struct PresetOverrides {
  std::optional<double> lambda;
  std::optional<double> alpha;
  std::optional<double> a_d, b_d, a_s, b_s;
  std::optional<int> r_d, r_s;
  std::optional<int> stride;
  std::optional<int> iterations;
  // Numerical knobs; never pinned.
  std::optional<double> linsolve_tol;
  std::optional<int> linsolve_maxiter;
};

namespace detail {

template <typename T>
void reject_if_set(const std::optional<T>& v, std::string_view field, Mode m) {
  if (v)
    throw ConfigError(std::string(field) + " is fixed by the " + std::string(mode_name(m)) +
                      " preset");
}

}  // namespace detail

inline SmoothConfig mode_preset(Mode mode, const PresetOverrides& ov = {}) {
  using detail::reject_if_set;
  SmoothConfig cfg;
  cfg.mode = mode;

  reject_if_set(ov.alpha, "alpha", mode);
  reject_if_set(ov.a_d, "a_d", mode);
  reject_if_set(ov.a_s, "a_s", mode);
  reject_if_set(ov.iterations, "iterations", mode);

  const bool free_radii = mode == Mode::kEPSP;
  const bool free_smooth = mode == Mode::kEP2 || mode == Mode::kEPSP;
  if (!free_radii) {
    reject_if_set(ov.b_d, "b_d", mode);
    reject_if_set(ov.r_d, "r_d", mode);
  }
  if (!free_smooth) {
    reject_if_set(ov.b_s, "b_s", mode);
    reject_if_set(ov.r_s, "r_s", mode);
    reject_if_set(ov.stride, "stride", mode);
  }

  switch (mode) {
    case Mode::kSP1:
      cfg.alpha = 0.5;
      cfg.data_penalty = {kEpsilon, kAboveRange};
      cfg.smooth_penalty = {kEpsilon, kAboveRange};
      cfg.data_nbr = {1, 1, true};
      cfg.smooth_nbr = {1, 1, false};
      cfg.iterations = 10;
      break;
    case Mode::kSP2:
      cfg.alpha = 0.2;
      cfg.data_penalty = {kEpsilon, kAboveRange};
      cfg.smooth_penalty = {kEpsilon, kAboveRange};
      cfg.data_nbr = {1, 1, true};
      cfg.smooth_nbr = {1, 1, false};
      cfg.iterations = 1;
      break;
    case Mode::kEP1:
      cfg.alpha = 1.2;
      cfg.data_penalty = {kAboveRange, kAboveRange};
      cfg.smooth_penalty = {kAboveRange, kAboveRange};
      cfg.data_nbr = {0, 1, true};
      cfg.smooth_nbr = {1, 1, false};
      cfg.iterations = 1;
      break;
    case Mode::kEP2:
      cfg.alpha = 0.5;
      cfg.data_penalty = {kAboveRange, kAboveRange};
      cfg.smooth_penalty = {kEpsilon, 0.1};
      cfg.data_nbr = {0, 1, true};
      cfg.smooth_nbr = {1, 1, false};
      cfg.iterations = 10;
      break;
    case Mode::kEPSP:
      cfg.alpha = 0.5;
      cfg.data_penalty = {kEpsilon, 0.1};
      cfg.smooth_penalty = {kEpsilon, 0.1};
      cfg.data_nbr = {1, 1, true};
      cfg.smooth_nbr = {1, 1, false};
      cfg.iterations = 10;
      break;
  }

  if (ov.lambda) cfg.lambda = *ov.lambda;
  if (ov.b_d) cfg.data_penalty.b = *ov.b_d;
  if (ov.b_s) cfg.smooth_penalty.b = *ov.b_s;
  if (ov.r_d) cfg.data_nbr.radius = *ov.r_d;
  if (ov.r_s) cfg.smooth_nbr.radius = *ov.r_s;
  if (ov.stride) {
    cfg.smooth_nbr.stride = *ov.stride;
    if (cfg.data_nbr.radius > 0) cfg.data_nbr.stride = *ov.stride;
  }
  if (ov.linsolve_tol) cfg.linsolve_tol = *ov.linsolve_tol;
  if (ov.linsolve_maxiter) cfg.linsolve_maxiter = *ov.linsolve_maxiter;

  // Truncating cells must stay below the intensity range, the others above.
  if (free_smooth && !(cfg.smooth_penalty.b < 1.0))
    throw ConfigError("b_s must be below the intensity range (< 1) for this preset");
  if (mode == Mode::kEPSP && !(cfg.data_penalty.b < 1.0))
    throw ConfigError("b_d must be below the intensity range (< 1) for this preset");
  if (free_smooth && cfg.smooth_nbr.radius < 1) throw ConfigError("r_s must be >= 1");
  if (mode == Mode::kEPSP && cfg.data_nbr.radius < 1) throw ConfigError("r_d must be >= 1");

  cfg.validate();
  return cfg;
}

}  // namespace gsmooth
