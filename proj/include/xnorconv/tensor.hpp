#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xnorconv/error.hpp"

namespace xnorconv {

namespace detail {

inline std::size_t checked_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) {
    throw Error(Errc::dimension_overflow, "element count does not fit in size_t");
  }
  return a * b;
}

}  // namespace detail

// Dense channel-major, row-major tensor. Values are fixed at construction.
class Tensor3 {
 public:
  Tensor3() = default;

  Tensor3(std::size_t channels, std::size_t height, std::size_t width, std::vector<float> data)
      : channels_(channels), height_(height), width_(width), data_(std::move(data)) {
    if (detail::checked_mul(detail::checked_mul(channels, height), width) != data_.size()) {
      throw Error(Errc::size_mismatch, "tensor data length does not match c*h*w");
    }
    for (float v : data_) {
      if (!std::isfinite(v)) throw Error(Errc::non_finite_value, "tensor contains NaN or Inf");
    }
  }

  static Tensor3 zeros(std::size_t channels, std::size_t height, std::size_t width) {
    std::vector<float> data(detail::checked_mul(detail::checked_mul(channels, height), width), 0.0f);
    return Tensor3(channels, height, width, std::move(data));
  }

  std::size_t channels() const noexcept { return channels_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const float> data() const noexcept { return data_; }

  std::span<const float> channel(std::size_t ch) const {
    return std::span<const float>(data_).subspan(ch * height_ * width_, height_ * width_);
  }

  std::span<const float> row(std::size_t ch, std::size_t y) const {
    return std::span<const float>(data_).subspan((ch * height_ + y) * width_, width_);
  }

  float operator()(std::size_t ch, std::size_t y, std::size_t x) const {
    return data_[(ch * height_ + y) * width_ + x];
  }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> data_;
};

class Tensor2 {
 public:
  Tensor2() = default;

  Tensor2(std::size_t height, std::size_t width, std::vector<float> data)
      : height_(height), width_(width), data_(std::move(data)) {
    if (detail::checked_mul(height, width) != data_.size()) {
      throw Error(Errc::size_mismatch, "plane data length does not match h*w");
    }
  }

  static Tensor2 filled(std::size_t height, std::size_t width, float value) {
    return Tensor2(height, width, std::vector<float>(detail::checked_mul(height, width), value));
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const float> data() const noexcept { return data_; }

  std::span<const float> row(std::size_t y) const {
    return std::span<const float>(data_).subspan(y * width_, width_);
  }

  float operator()(std::size_t y, std::size_t x) const { return data_[y * width_ + x]; }

  friend bool operator==(const Tensor2&, const Tensor2&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<float> data_;
};

inline Tensor3 zero_pad(const Tensor3& t, std::size_t pad) {
  if (pad == 0) return t;
  const std::size_t ph = t.height() + 2 * pad;
  const std::size_t pw = t.width() + 2 * pad;
  std::vector<float> out(detail::checked_mul(detail::checked_mul(t.channels(), ph), pw), 0.0f);
  for (std::size_t ch = 0; ch < t.channels(); ++ch) {
    for (std::size_t y = 0; y < t.height(); ++y) {
      auto src = t.row(ch, y);
      std::copy(src.begin(), src.end(), out.begin() + ((ch * ph + y + pad) * pw + pad));
    }
  }
  return Tensor3(t.channels(), ph, pw, std::move(out));
}

namespace detail {

// A[y][x] for one row: sequential sum over channels, then divided by c.
inline void abs_mean_row(const Tensor3& t, std::size_t y, float* out) {
  const std::size_t w = t.width();
  const float c = static_cast<float>(t.channels());
  auto first = t.row(0, y);
  for (std::size_t x = 0; x < w; ++x) out[x] = std::fabs(first[x]);
  for (std::size_t ch = 1; ch < t.channels(); ++ch) {
    auto r = t.row(ch, y);
    for (std::size_t x = 0; x < w; ++x) out[x] += std::fabs(r[x]);
  }
  if (t.channels() > 1) {
    for (std::size_t x = 0; x < w; ++x) out[x] /= c;
  }
}

}  // namespace detail

/// Per-pixel mean of absolute values across channels.
inline Tensor2 channel_abs_mean(const Tensor3& t) {
  if (t.channels() == 0) throw Error(Errc::invalid_argument, "channel_abs_mean needs at least one channel");
  std::vector<float> out(t.height() * t.width());
  for (std::size_t y = 0; y < t.height(); ++y) detail::abs_mean_row(t, y, out.data() + y * t.width());
  return Tensor2(t.height(), t.width(), std::move(out));
}

// ---------------------------------------------------------------------------
// Fixture files: "BTSR", u32 c, u32 h, u32 w (little endian), then c*h*w
// little-endian binary32 values in channel-major row-major order.
// ---------------------------------------------------------------------------

inline constexpr std::array<char, 4> kTensorMagic{'B', 'T', 'S', 'R'};
inline constexpr std::uint64_t kMaxTensorElements = std::uint64_t{1} << 32;

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                         static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  os.write(bytes, 4);
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

inline void write_tensor(std::ostream& os, const Tensor3& t) {
  constexpr auto max_dim = std::numeric_limits<std::uint32_t>::max();
  if (t.channels() > max_dim || t.height() > max_dim || t.width() > max_dim) {
    throw Error(Errc::dimension_overflow, "dimension does not fit in 32 bits");
  }
  os.write(kTensorMagic.data(), kTensorMagic.size());
  detail::put_u32(os, static_cast<std::uint32_t>(t.channels()));
  detail::put_u32(os, static_cast<std::uint32_t>(t.height()));
  detail::put_u32(os, static_cast<std::uint32_t>(t.width()));
  for (float v : t.data()) detail::put_u32(os, std::bit_cast<std::uint32_t>(v));
  if (!os) throw Error(Errc::io_failure, "failed writing tensor");
}

inline Tensor3 read_tensor(std::istream& is) {
  unsigned char header[16];
  is.read(reinterpret_cast<char*>(header), sizeof(header));
  const auto got = static_cast<std::size_t>(is.gcount());
  if (got >= 4 && !std::equal(kTensorMagic.begin(), kTensorMagic.end(), reinterpret_cast<const char*>(header))) {
    throw Error(Errc::bad_magic, "not a tensor fixture");
  }
  if (got < sizeof(header)) throw Error(Errc::truncated_payload, "header shorter than 16 bytes");

  const std::uint64_t c = detail::get_u32(header + 4);
  const std::uint64_t h = detail::get_u32(header + 8);
  const std::uint64_t w = detail::get_u32(header + 12);
  // Each dim is < 2^32, so c*h fits in 64 bits; guard the second product.
  const std::uint64_t ch = c * h;
  if ((w != 0 && ch > kMaxTensorElements / w) || ch * w > kMaxTensorElements) {
    throw Error(Errc::dimension_overflow, "declared tensor exceeds 2^32 elements");
  }
  const std::size_t n = static_cast<std::size_t>(ch * w);

  std::vector<unsigned char> payload(n * 4);
  is.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(is.gcount()) != payload.size()) {
    throw Error(Errc::truncated_payload, "payload shorter than declared dims");
  }
  if (is.peek() != std::istream::traits_type::eof()) {
    throw Error(Errc::trailing_data, "bytes after declared payload");
  }

  std::vector<float> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = std::bit_cast<float>(detail::get_u32(payload.data() + 4 * i));
  return Tensor3(static_cast<std::size_t>(c), static_cast<std::size_t>(h), static_cast<std::size_t>(w),
                 std::move(data));
}

inline void save_tensor(const Tensor3& t, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(Errc::io_failure, "cannot open " + path.string() + " for writing");
  write_tensor(os, t);
}

inline Tensor3 load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::io_failure, "cannot open " + path.string());
  return read_tensor(is);
}

}  // namespace xnorconv
