#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "xnorconv/error.hpp"
#include "xnorconv/tensor.hpp"
#include "xnorconv/xnor_engine.hpp"

namespace xnorconv {

/// Uniform averaging kernel, every entry 1/(k_h*k_w).
inline Tensor2 box_kernel(std::size_t k_h, std::size_t k_w) {
  if (k_h == 0 || k_w == 0) throw Error(Errc::invalid_argument, "box kernel dimensions must be >= 1");
  return Tensor2::filled(k_h, k_w, static_cast<float>(1.0 / static_cast<double>(k_h * k_w)));
}

/// Row-at-a-time zero-padded box filter. The horizontal pass sums k_w
/// neighbours left to right, the vertical pass sums k_h partial rows top to
/// bottom, then the sum is scaled by the box weight. Both the staged and the
/// fused pipeline go through this so their K planes are bit-identical.
class BoxFilterRows {
 public:
  BoxFilterRows(std::size_t width, std::size_t k_h, std::size_t k_w, std::size_t pad)
      : width_(width), k_h_(k_h), k_w_(k_w), pad_(pad) {
    if (k_h == 0 || k_w == 0) throw Error(Errc::invalid_argument, "box kernel dimensions must be >= 1");
    if (width + 2 * pad < k_w) throw Error(Errc::invalid_argument, "padded row shorter than the kernel");
    out_w_ = width + 2 * pad - k_w + 1;
    weight_ = static_cast<float>(1.0 / static_cast<double>(k_h * k_w));
  }

  std::size_t out_w() const noexcept { return out_w_; }
  std::size_t padded_w() const noexcept { return width_ + 2 * pad_; }

  /// Writes out_w() horizontal sums of one zero-padded A row. `padded`
  /// holds padded_w() values with the A row at offset pad.
  void horizontal(const float* padded, float* out) const {
    std::copy(padded, padded + out_w_, out);
    for (std::size_t kx = 1; kx < k_w_; ++kx) {
      const float* src = padded + kx;
      for (std::size_t x = 0; x < out_w_; ++x) out[x] += src[x];
    }
  }

  /// Horizontal sums of a padding row.
  void horizontal_zero(float* out) const { std::fill(out, out + out_w_, 0.0f); }

  std::size_t pad() const noexcept { return pad_; }

  /// One K row from k_h consecutive horizontal rows.
  void vertical(const float* hrows, std::size_t hrow_stride, float* out) const {
    std::copy(hrows, hrows + out_w_, out);
    for (std::size_t ky = 1; ky < k_h_; ++ky) {
      const float* src = hrows + ky * hrow_stride;
      for (std::size_t x = 0; x < out_w_; ++x) out[x] += src[x];
    }
    for (std::size_t x = 0; x < out_w_; ++x) out[x] *= weight_;
  }

 private:
  std::size_t width_;
  std::size_t k_h_;
  std::size_t k_w_;
  std::size_t pad_;
  std::size_t out_w_ = 0;
  float weight_ = 0.0f;
};

/// K = A * box_kernel(k_h, k_w) with zero padding `pad`, so K has the
/// dimensions of the convolution output.
inline Tensor2 compute_K(const Tensor2& a, std::size_t k_h, std::size_t k_w, std::size_t pad) {
  if (a.height() + 2 * pad < k_h) throw Error(Errc::invalid_argument, "padded plane shorter than the kernel");
  BoxFilterRows box(a.width(), k_h, k_w, pad);
  const std::size_t ph = a.height() + 2 * pad;
  const std::size_t out_h = ph - k_h + 1;
  const std::size_t out_w = box.out_w();

  std::vector<float> padded(box.padded_w(), 0.0f);
  std::vector<float> h(ph * out_w);
  for (std::size_t py = 0; py < ph; ++py) {
    if (py >= pad && py < pad + a.height()) {
      auto row = a.row(py - pad);
      std::copy(row.begin(), row.end(), padded.begin() + static_cast<std::ptrdiff_t>(pad));
      box.horizontal(padded.data(), h.data() + py * out_w);
    } else {
      box.horizontal_zero(h.data() + py * out_w);
    }
  }
  std::vector<float> k(out_h * out_w);
  for (std::size_t y = 0; y < out_h; ++y) box.vertical(h.data() + y * out_w, out_w, k.data() + y * out_w);
  return Tensor2(out_h, out_w, std::move(k));
}

/// Per-pixel input scale K and the filter scale alpha.
struct ScalingField {
  Tensor2 K;
  float alpha = 0.0f;
};

namespace detail {

inline float scale_value(std::int32_t v, float k, float alpha) { return (static_cast<float>(v) * k) * alpha; }

}  // namespace detail

inline Tensor2 apply_scaling(const IntOutputPlane& ints, const ScalingField& field) {
  if (ints.height() != field.K.height() || ints.width() != field.K.width()) {
    throw Error(Errc::dimension_mismatch, "integer plane and K have different dimensions");
  }
  std::vector<float> out(ints.values().size());
  const auto v = ints.values();
  const auto k = field.K.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = detail::scale_value(v[i], k[i], field.alpha);
  return Tensor2(ints.height(), ints.width(), std::move(out));
}

}  // namespace xnorconv
