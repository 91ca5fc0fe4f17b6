#pragma once

// Image file I/O: binary PGM/PPM (8/16-bit), PNG (8/16-bit) and PFM.
//
// LDR samples are normalized to [0,1] on read (value / maxval) and
// quantized on write with round-half-away-from-zero after clamping. PFM keeps
// raw float radiance; its scale sign selects byte order (negative = little
// endian) and rows are stored bottom to top.

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsmooth/core.hpp"

namespace gsmooth {

/// Decoding/encoding failure; `offset()` is the byte position where it was detected.
class ImageIoError : public std::runtime_error {
 public:
  ImageIoError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  explicit ImageIoError(const std::string& what) : std::runtime_error(what), offset_(0) {}
  std::size_t offset() const { return offset_; }

  /// Same error with `prefix` prepended to the message.
  ImageIoError with_context(const std::string& prefix) const {
    ImageIoError e(prefix + what());
    e.offset_ = offset_;
    return e;
  }

 private:
  std::size_t offset_;
};

enum class ImageFormat { kPnm, kPng, kPfm };

struct WriteOptions {
  bool clamp = true;   // clamp LDR samples to [0,1]; when false, out-of-range throws
  int bit_depth = 8;   // 8 or 16 (LDR formats)
};

using Bytes = std::vector<std::uint8_t>;

namespace detail {

inline std::uint32_t quantize(double v, std::uint32_t maxval, bool clamp) {
  if (!std::isfinite(v)) throw ImageIoError("non-finite sample cannot be quantized");
  if (v < 0.0 || v > 1.0) {
    if (!clamp) throw ImageIoError("sample outside [0,1] and clamping disabled");
    v = std::clamp(v, 0.0, 1.0);
  }
  return static_cast<std::uint32_t>(std::round(v * maxval));
}

// ---------------------------------------------------------------------------
// PNM

class PnmHeaderReader {
 public:
  explicit PnmHeaderReader(std::span<const std::uint8_t> b) : bytes_(b) {}

  std::size_t pos() const { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = static_cast<char>(bytes_[pos_]);
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_uint(const char* field) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000'000L) throw ImageIoError(std::string("PNM ") + field + " too large", start);
      ++pos_;
    }
    if (pos_ == start) {
      if (pos_ >= bytes_.size())
        throw ImageIoError(std::string("truncated PNM header, expected ") + field, pos_);
      throw ImageIoError(std::string("malformed PNM header, expected ") + field, pos_);
    }
    return v;
  }

  void expect_single_whitespace() {
    if (pos_ >= bytes_.size()) throw ImageIoError("truncated PNM header", pos_);
    if (!std::isspace(bytes_[pos_]))
      throw ImageIoError("malformed PNM header, expected whitespace before raster", pos_);
    ++pos_;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

inline ImageBuffer decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw ImageIoError("not a binary PGM/PPM file", 0);
  const int channels = bytes[1] == '5' ? 1 : 3;
  PnmHeaderReader hdr(bytes);
  const long w = hdr.read_uint("width");
  const long h = hdr.read_uint("height");
  hdr.skip_space_and_comments();
  const std::size_t maxval_pos = hdr.pos();
  const long maxval = hdr.read_uint("maxval");
  hdr.expect_single_whitespace();
  if (w <= 0 || h <= 0) throw ImageIoError("PNM dimensions must be positive", maxval_pos);
  if (maxval <= 0 || maxval > 65535) throw ImageIoError("PNM maxval out of range", maxval_pos);

  const std::size_t bps = maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(w) * h * channels;
  const std::size_t start = hdr.pos();
  if (bytes.size() - start < count * bps)
    throw ImageIoError("truncated PNM payload: expected " + std::to_string(count * bps) +
                           " bytes, found " + std::to_string(bytes.size() - start),
                       bytes.size());

  std::vector<double> samples(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t off = start + i * bps;
    const std::uint32_t v = bps == 2 ? (std::uint32_t(bytes[off]) << 8) | bytes[off + 1] : bytes[off];
    if (v > static_cast<std::uint32_t>(maxval)) throw ImageIoError("PNM sample exceeds maxval", off);
    samples[i] = static_cast<double>(v) / static_cast<double>(maxval);
  }
  return ImageBuffer(static_cast<int>(w), static_cast<int>(h), channels, std::move(samples));
}

inline Bytes encode_pnm(const ImageBuffer& img, const WriteOptions& opt) {
  if (img.channels() != 1 && img.channels() != 3)
    throw ImageIoError("PNM supports 1 or 3 channels");
  if (opt.bit_depth != 8 && opt.bit_depth != 16) throw ImageIoError("PNM bit depth must be 8 or 16");
  const std::uint32_t maxval = opt.bit_depth == 16 ? 65535 : 255;
  const std::string header = std::string(img.channels() == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(img.width()) + " " + std::to_string(img.height()) +
                             "\n" + std::to_string(maxval) + "\n";
  Bytes out(header.begin(), header.end());
  out.reserve(out.size() + img.size() * (opt.bit_depth / 8));
  for (double v : img.samples()) {
    const std::uint32_t q = quantize(v, maxval, opt.clamp);
    if (opt.bit_depth == 16) out.push_back(static_cast<std::uint8_t>(q >> 8));
    out.push_back(static_cast<std::uint8_t>(q & 0xff));
  }
  return out;
}

// ---------------------------------------------------------------------------
// PFM

inline std::string read_pfm_token(std::span<const std::uint8_t> b, std::size_t& pos,
                                  const char* field) {
  while (pos < b.size() && std::isspace(b[pos])) ++pos;
  const std::size_t start = pos;
  while (pos < b.size() && !std::isspace(b[pos])) ++pos;
  if (pos == start) throw ImageIoError(std::string("truncated PFM header, expected ") + field, pos);
  return std::string(b.begin() + start, b.begin() + pos);
}

inline ImageBuffer decode_pfm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != 'F' && bytes[1] != 'f'))
    throw ImageIoError("not a PFM file", 0);
  const int channels = bytes[1] == 'F' ? 3 : 1;
  std::size_t pos = 2;
  auto parse_int = [&](const char* field) {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    const std::size_t at = pos;
    const std::string tok = read_pfm_token(bytes, pos, field);
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || v <= 0)
      throw ImageIoError(std::string("malformed PFM ") + field, at);
    return v;
  };
  const long w = parse_int("width");
  const long h = parse_int("height");
  while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
  const std::size_t scale_pos = pos;
  const std::string scale_tok = read_pfm_token(bytes, pos, "scale");
  double scale = 0.0;
  try {
    std::size_t used = 0;
    scale = std::stod(scale_tok, &used);
    if (used != scale_tok.size()) scale = 0.0;
  } catch (const std::exception&) {
    scale = 0.0;
  }
  if (scale == 0.0 || !std::isfinite(scale)) throw ImageIoError("malformed PFM scale", scale_pos);
  if (pos >= bytes.size() || !std::isspace(bytes[pos]))
    throw ImageIoError("malformed PFM header, expected whitespace before raster", pos);
  ++pos;

  const bool little = scale < 0.0;
  const std::size_t count = static_cast<std::size_t>(w) * h * channels;
  if (bytes.size() - pos < count * 4)
    throw ImageIoError("truncated PFM payload: expected " + std::to_string(count * 4) +
                           " bytes, found " + std::to_string(bytes.size() - pos),
                       bytes.size());

  std::vector<double> samples(count);
  const std::size_t row_len = static_cast<std::size_t>(w) * channels;
  for (long fy = 0; fy < h; ++fy) {
    const long y = h - 1 - fy;  // bottom-to-top storage
    for (std::size_t k = 0; k < row_len; ++k) {
      const std::size_t off = pos + (static_cast<std::size_t>(fy) * row_len + k) * 4;
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        const std::uint32_t byte = bytes[off + b];
        bits |= little ? byte << (8 * b) : byte << (8 * (3 - b));
      }
      samples[static_cast<std::size_t>(y) * row_len + k] = std::bit_cast<float>(bits);
    }
  }
  return ImageBuffer(static_cast<int>(w), static_cast<int>(h), channels, std::move(samples),
                     SampleRange::kLinear);
}

/// Writes little-endian (scale -1) PFM.
inline Bytes encode_pfm(const ImageBuffer& img) {
  if (img.channels() != 1 && img.channels() != 3) throw ImageIoError("PFM supports 1 or 3 channels");
  const std::string header = std::string(img.channels() == 3 ? "PF" : "Pf") + "\n" +
                             std::to_string(img.width()) + " " + std::to_string(img.height()) +
                             "\n-1.0\n";
  Bytes out(header.begin(), header.end());
  const std::size_t row_len = static_cast<std::size_t>(img.width()) * img.channels();
  for (int fy = 0; fy < img.height(); ++fy) {
    const int y = img.height() - 1 - fy;
    for (std::size_t k = 0; k < row_len; ++k) {
      const float v = static_cast<float>(img.samples()[static_cast<std::size_t>(y) * row_len + k]);
      const std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
      for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// PNG (libpng, in memory)

struct PngReadState {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
  char message[256] = {};
  std::jmp_buf jump;
};

extern "C" inline void gsmooth_png_error(png_structp png, png_const_charp msg) {
  auto* st = static_cast<PngReadState*>(png_get_error_ptr(png));
  std::snprintf(st->message, sizeof st->message, "%s", msg);
  std::longjmp(st->jump, 1);
}

extern "C" inline void gsmooth_png_warning(png_structp, png_const_charp) {}

extern "C" inline void gsmooth_png_read(png_structp png, png_bytep out, png_size_t len) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->bytes.size() - st->pos < len) {
    std::snprintf(st->message, sizeof st->message, "truncated PNG data");
    st->pos = st->bytes.size();
    std::longjmp(st->jump, 1);
  }
  std::memcpy(out, st->bytes.data() + st->pos, len);
  st->pos += len;
}

inline ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
    throw ImageIoError("not a PNG file", 0);

  // Everything with a destructor lives outside the setjmp region.
  PngReadState st;
  st.bytes = bytes;
  std::vector<std::uint8_t> raster;
  std::vector<png_bytep> rows;
  png_uint_32 w = 0, h = 0;
  int channels = 0, depth = 0;

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &st, gsmooth_png_error,
                                           gsmooth_png_warning);
  if (!png) throw ImageIoError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw ImageIoError("libpng initialization failed");
  }

  if (setjmp(st.jump)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ImageIoError(std::string("PNG decode error: ") + st.message, st.pos);
  }

  png_set_read_fn(png, &st, gsmooth_png_read);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS))
    png_set_strip_alpha(png);
  png_read_update_info(png, info);
  w = png_get_image_width(png, info);
  h = png_get_image_height(png, info);
  channels = png_get_channels(png, info);
  depth = png_get_bit_depth(png, info);
  raster.resize(png_get_rowbytes(png, info) * h);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = raster.data() + y * png_get_rowbytes(png, info);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (channels != 1 && channels != 3) throw ImageIoError("unsupported PNG channel layout");
  const std::size_t count = static_cast<std::size_t>(w) * h * channels;
  std::vector<double> samples(count);
  if (depth == 16) {
    for (std::size_t i = 0; i < count; ++i)
      samples[i] = ((raster[2 * i] << 8) | raster[2 * i + 1]) / 65535.0;
  } else {
    for (std::size_t i = 0; i < count; ++i) samples[i] = raster[i] / 255.0;
  }
  return ImageBuffer(static_cast<int>(w), static_cast<int>(h), channels, std::move(samples));
}

struct PngWriteState {
  Bytes* out = nullptr;
  char message[256] = {};
  std::jmp_buf jump;
};

extern "C" inline void gsmooth_png_write_error(png_structp png, png_const_charp msg) {
  auto* st = static_cast<PngWriteState*>(png_get_error_ptr(png));
  std::snprintf(st->message, sizeof st->message, "%s", msg);
  std::longjmp(st->jump, 1);
}

extern "C" inline void gsmooth_png_write(png_structp png, png_bytep data, png_size_t len) {
  auto* st = static_cast<PngWriteState*>(png_get_io_ptr(png));
  st->out->insert(st->out->end(), data, data + len);
}

extern "C" inline void gsmooth_png_flush(png_structp) {}

inline Bytes encode_png(const ImageBuffer& img, const WriteOptions& opt) {
  if (img.channels() != 1 && img.channels() != 3) throw ImageIoError("PNG supports 1 or 3 channels");
  if (opt.bit_depth != 8 && opt.bit_depth != 16) throw ImageIoError("PNG bit depth must be 8 or 16");
  const std::uint32_t maxval = opt.bit_depth == 16 ? 65535 : 255;
  const std::size_t bps = opt.bit_depth / 8;
  const std::size_t row_bytes = static_cast<std::size_t>(img.width()) * img.channels() * bps;

  std::vector<std::uint8_t> raster(row_bytes * img.height());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const std::uint32_t q = quantize(img.samples()[i], maxval, opt.clamp);
    if (bps == 2) {
      raster[2 * i] = static_cast<std::uint8_t>(q >> 8);
      raster[2 * i + 1] = static_cast<std::uint8_t>(q & 0xff);
    } else {
      raster[i] = static_cast<std::uint8_t>(q);
    }
  }
  std::vector<png_bytep> rows(img.height());
  for (int y = 0; y < img.height(); ++y) rows[y] = raster.data() + y * row_bytes;

  Bytes out;
  PngWriteState st;
  st.out = &out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &st, gsmooth_png_write_error,
                                            gsmooth_png_warning);
  if (!png) throw ImageIoError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw ImageIoError("libpng initialization failed");
  }
  if (setjmp(st.jump)) {
    png_destroy_write_struct(&png, &info);
    throw ImageIoError(std::string("PNG encode error: ") + st.message);
  }
  png_set_write_fn(png, &st, gsmooth_png_write, gsmooth_png_flush);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
               static_cast<png_uint_32>(img.height()), opt.bit_depth,
               img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline ImageFormat format_from_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return ImageFormat::kPnm;
  if (ext == ".png") return ImageFormat::kPng;
  if (ext == ".pfm") return ImageFormat::kPfm;
  throw ImageIoError("unknown image extension '" + ext + "'");
}

/// Decodes by magic bytes.
inline ImageBuffer decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 2 && bytes[0] == 'P') {
    if (bytes[1] == '5' || bytes[1] == '6') return detail::decode_pnm(bytes);
    if (bytes[1] == 'F' || bytes[1] == 'f') return detail::decode_pfm(bytes);
  }
  if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P') return detail::decode_png(bytes);
  throw ImageIoError("unknown image magic bytes", 0);
}

inline Bytes encode_image(const ImageBuffer& img, ImageFormat fmt, const WriteOptions& opt = {}) {
  switch (fmt) {
    case ImageFormat::kPnm: return detail::encode_pnm(img, opt);
    case ImageFormat::kPng: return detail::encode_png(img, opt);
    case ImageFormat::kPfm: return detail::encode_pfm(img);
  }
  throw ImageIoError("unknown image format");
}

inline ImageBuffer read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError("cannot open '" + path.string() + "'");
  const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_image(bytes);
  } catch (const ImageIoError& e) {
    throw e.with_context(path.string() + ": ");
  }
}

inline void write_image(const std::filesystem::path& path, const ImageBuffer& img,
                        const WriteOptions& opt = {}) {
  const ImageFormat fmt = format_from_extension(path);
  if (fmt == ImageFormat::kPnm) {
    const std::string ext = path.extension().string();
    if ((ext == ".pgm" && img.channels() != 1) || (ext == ".ppm" && img.channels() != 3))
      throw ImageIoError("channel count does not match '" + ext + "'");
  }
  const Bytes bytes = encode_image(img, fmt, opt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ImageIoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ImageIoError("write failed for '" + path.string() + "'");
}

}  // namespace gsmooth
