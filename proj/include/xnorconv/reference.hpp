#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "xnorconv/binarizer.hpp"
#include "xnorconv/error.hpp"
#include "xnorconv/parallel.hpp"
#include "xnorconv/tensor.hpp"
#include "xnorconv/xnor_engine.hpp"

// Straightforward nested-loop convolutions. They serve as ground truth for the
// bit-packed engine and as the "vanilla" baseline in benchmarks, so they are
// deliberately left unblocked and unvectorized by hand.

namespace xnorconv {

namespace detail {

inline void check_conv_dims(std::size_t in_c, std::size_t in_h, std::size_t in_w, std::size_t w_c, std::size_t k_h,
                            std::size_t k_w, std::size_t pad) {
  if (in_c != w_c) throw Error(Errc::dimension_mismatch, "input and weight channel counts differ");
  if (k_h == 0 || k_w == 0) throw Error(Errc::dimension_mismatch, "empty kernel");
  if (k_h > in_h + 2 * pad || k_w > in_w + 2 * pad) {
    throw Error(Errc::dimension_mismatch, "kernel larger than the padded input");
  }
}

// Rows [y_begin, y_end) of a valid correlation over an already padded input.
inline void naive_correlate_rows(const float* padded, std::size_t channels, std::size_t ph, std::size_t pw,
                                 const float* weights, std::size_t k_h, std::size_t k_w, float* out,
                                 std::size_t out_w, std::size_t y_begin, std::size_t y_end) {
  for (std::size_t y = y_begin; y < y_end; ++y) {
    for (std::size_t x = 0; x < out_w; ++x) {
      float sum = 0.0f;
      for (std::size_t ch = 0; ch < channels; ++ch) {
        for (std::size_t ky = 0; ky < k_h; ++ky) {
          for (std::size_t kx = 0; kx < k_w; ++kx) {
            sum += padded[(ch * ph + y + ky) * pw + x + kx] * weights[(ch * k_h + ky) * k_w + kx];
          }
        }
      }
      out[y * out_w + x] = sum;
    }
  }
}

}  // namespace detail

/// Full-precision cross-correlation summed over channels, zero padding,
/// unit stride.
inline Tensor2 conv2d_float(const Tensor3& input, const Tensor3& weights, std::size_t pad) {
  detail::check_conv_dims(input.channels(), input.height(), input.width(), weights.channels(), weights.height(),
                          weights.width(), pad);
  const Tensor3 padded = zero_pad(input, pad);
  const std::size_t out_h = padded.height() - weights.height() + 1;
  const std::size_t out_w = padded.width() - weights.width() + 1;
  std::vector<float> out(out_h * out_w);
  detail::naive_correlate_rows(padded.data().data(), padded.channels(), padded.height(), padded.width(),
                               weights.data().data(), weights.height(), weights.width(), out.data(), out_w, 0, out_h);
  return Tensor2(out_h, out_w, std::move(out));
}

/// Benchmark form of conv2d_float: the padded buffer is allocated once, and
/// run() copies the input into it and convolves, optionally split over
/// output rows.
class VanillaConvolution {
 public:
  VanillaConvolution(std::size_t channels, std::size_t height, std::size_t width, Tensor3 weights, std::size_t pad)
      : channels_(channels), height_(height), width_(width), pad_(pad), weights_(std::move(weights)) {
    detail::check_conv_dims(channels, height, width, weights_.channels(), weights_.height(), weights_.width(), pad);
    ph_ = height + 2 * pad;
    pw_ = width + 2 * pad;
    out_h_ = ph_ - weights_.height() + 1;
    out_w_ = pw_ - weights_.width() + 1;
    padded_.assign(channels * ph_ * pw_, 0.0f);
  }

  std::size_t out_h() const noexcept { return out_h_; }
  std::size_t out_w() const noexcept { return out_w_; }

  void run(const Tensor3& input, std::span<float> out, unsigned threads = 1) {
    if (input.channels() != channels_ || input.height() != height_ || input.width() != width_) {
      throw Error(Errc::dimension_mismatch, "input does not match the planned shape");
    }
    if (out.size() != out_h_ * out_w_) throw Error(Errc::dimension_mismatch, "output buffer has the wrong size");
    for (std::size_t ch = 0; ch < channels_; ++ch) {
      for (std::size_t y = 0; y < height_; ++y) {
        auto src = input.row(ch, y);
        std::copy(src.begin(), src.end(), padded_.begin() + ((ch * ph_ + y + pad_) * pw_ + pad_));
      }
    }
    parallel_for(out_h_, threads, [&](std::size_t begin, std::size_t end, std::size_t) {
      detail::naive_correlate_rows(padded_.data(), channels_, ph_, pw_, weights_.data().data(), weights_.height(),
                                   weights_.width(), out.data(), out_w_, begin, end);
    });
  }

 private:
  std::size_t channels_;
  std::size_t height_;
  std::size_t width_;
  std::size_t pad_;
  Tensor3 weights_;
  std::size_t ph_ = 0;
  std::size_t pw_ = 0;
  std::size_t out_h_ = 0;
  std::size_t out_w_ = 0;
  std::vector<float> padded_;
};

/// Integer cross-correlation of +-1 planes. Pixels in the padding ring are
/// sign(0) = +1, the same convention the packed engine uses.
inline IntOutputPlane sign_conv2d_int(std::span<const SignPlane> input, std::span<const SignPlane> weights,
                                      std::size_t pad) {
  if (input.empty() || input.size() != weights.size()) {
    throw Error(Errc::dimension_mismatch, "input and weight channel counts differ");
  }
  const std::size_t h = input[0].height();
  const std::size_t w = input[0].width();
  const std::size_t k_h = weights[0].height();
  const std::size_t k_w = weights[0].width();
  for (std::size_t ch = 0; ch < input.size(); ++ch) {
    if (input[ch].height() != h || input[ch].width() != w || weights[ch].height() != k_h ||
        weights[ch].width() != k_w) {
      throw Error(Errc::dimension_mismatch, "channel planes have inconsistent dimensions");
    }
  }
  detail::check_conv_dims(input.size(), h, w, weights.size(), k_h, k_w, pad);

  const std::size_t out_h = h + 2 * pad - k_h + 1;
  const std::size_t out_w = w + 2 * pad - k_w + 1;
  auto out = IntOutputPlane::zeros(out_h, out_w);
  for (std::size_t y = 0; y < out_h; ++y) {
    for (std::size_t x = 0; x < out_w; ++x) {
      std::int32_t sum = 0;
      for (std::size_t ch = 0; ch < input.size(); ++ch) {
        for (std::size_t ky = 0; ky < k_h; ++ky) {
          for (std::size_t kx = 0; kx < k_w; ++kx) {
            // Unsigned wrap-around makes out-of-range rows/cols fail the bound test.
            const std::size_t iy = y + ky - pad;
            const std::size_t ix = x + kx - pad;
            const std::int32_t s = (iy < h && ix < w) ? input[ch](iy, ix) : 1;
            sum += s * weights[ch](ky, kx);
          }
        }
      }
      out(y, x) = sum;
    }
  }
  return out;
}

/// Binary-weight convolution: real input against +-1 weights using only
/// additions and subtractions, then one multiply by alpha.
inline Tensor2 bwn_conv(const Tensor3& input, const BinaryWeightApprox& w, std::size_t pad) {
  if (w.signs.empty()) throw Error(Errc::dimension_mismatch, "empty binary filter");
  const std::size_t k_h = w.signs[0].height();
  const std::size_t k_w = w.signs[0].width();
  detail::check_conv_dims(input.channels(), input.height(), input.width(), w.signs.size(), k_h, k_w, pad);
  const Tensor3 padded = zero_pad(input, pad);
  const std::size_t out_h = padded.height() - k_h + 1;
  const std::size_t out_w = padded.width() - k_w + 1;
  std::vector<float> out(out_h * out_w);
  for (std::size_t y = 0; y < out_h; ++y) {
    for (std::size_t x = 0; x < out_w; ++x) {
      float sum = 0.0f;
      for (std::size_t ch = 0; ch < padded.channels(); ++ch) {
        for (std::size_t ky = 0; ky < k_h; ++ky) {
          for (std::size_t kx = 0; kx < k_w; ++kx) {
            const float v = padded(ch, y + ky, x + kx);
            sum = w.signs[ch](ky, kx) > 0 ? sum + v : sum - v;
          }
        }
      }
      out[y * out_w + x] = sum * w.alpha;
    }
  }
  return Tensor2(out_h, out_w, std::move(out));
}

}  // namespace xnorconv
