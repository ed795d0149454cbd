#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "xnorconv/binarizer.hpp"
#include "xnorconv/error.hpp"
#include "xnorconv/packer.hpp"
#include "xnorconv/parallel.hpp"
#include "xnorconv/scaling.hpp"
#include "xnorconv/tensor.hpp"
#include "xnorconv/xnor_engine.hpp"

namespace xnorconv {

/// Binary convolution of a c x h x w input with one or more filters:
///
///   out_f = (sign(I) (*) sign(W_f)) .* K * alpha_f,   K = mean_c|I| (*) box
///
/// Work is split into bands of one tile row each. A band packs its tiles,
/// runs the XNOR/popcount pass and, independently, computes its rows of K;
/// the two meet only in the final multiply. Bands are independent, so any
/// thread count gives bit-identical output.
///
/// Weights are binarized once at construction; all scratch is allocated up
/// front so run() does not allocate.
class XnorConvolution {
 public:
  XnorConvolution(std::size_t channels, std::size_t height, std::size_t width, std::span<const Tensor3> filters,
                  std::size_t pad, int word_bits = 64, unsigned threads = 1)
      : channels_(channels),
        height_(height),
        width_(width),
        pad_(pad),
        geom_(word_bits, kernel_dim(filters, &Tensor3::height), kernel_dim(filters, &Tensor3::width)),
        packer_(geom_, height, width, pad),
        box_(width, geom_.kernel_h(), geom_.kernel_w(), pad),
        tile_kernel_(detail::fixed_tile_kernel(geom_)) {
    if (channels == 0) throw Error(Errc::invalid_argument, "input needs at least one channel");
    for (const auto& w : filters) {
      if (w.channels() != channels || w.height() != geom_.kernel_h() || w.width() != geom_.kernel_w()) {
        throw Error(Errc::dimension_mismatch, "all filters must be channels x k_h x k_w");
      }
      filters_.push_back(make_binary_filter(sign_binarize(w), geom_));
    }
    set_threads(threads);
  }

  const TileGeometry& geometry() const noexcept { return geom_; }
  const std::vector<BinaryFilter>& filters() const noexcept { return filters_; }
  std::size_t out_h() const noexcept { return packer_.out_h(); }
  std::size_t out_w() const noexcept { return packer_.out_w(); }
  std::size_t output_size() const noexcept { return filters_.size() * out_h() * out_w(); }
  unsigned threads() const noexcept { return threads_; }

  void set_threads(unsigned threads) {
    threads_ = resolve_threads(threads);
    const auto& shape = packer_.shape();
    const std::size_t acc_w = shape.tiles_x * geom_.stride_x();
    const std::size_t band_rows = geom_.stride_y() + geom_.kernel_h() - 1;
    scratch_.resize(threads_);
    for (auto& s : scratch_) {
      s.pack.assign(packer_.scratch_words(), 0);
      s.tiles.assign(channels_ * shape.tiles_x, 0);
      s.acc.assign(geom_.stride_y() * acc_w, 0);
      s.padded.assign(box_.padded_w(), 0.0f);
      s.h_rows.assign(band_rows * out_w(), 0.0f);
      s.k_rows.assign(geom_.stride_y() * out_w(), 0.0f);
    }
  }

  /// Writes filters x out_h x out_w values.
  void run(const Tensor3& input, std::span<float> out) { run_impl<true>(input, out.data(), out.size()); }

  /// Integer sign-convolution only (no K, no alpha).
  void run_signed(const Tensor3& input, std::span<std::int32_t> out) {
    run_impl<false>(input, out.data(), out.size());
  }

  Tensor3 run(const Tensor3& input) {
    std::vector<float> out(output_size());
    run(input, out);
    return Tensor3(filters_.size(), out_h(), out_w(), std::move(out));
  }

 private:
  struct Scratch {
    std::vector<Word> pack;
    std::vector<Word> tiles;
    std::vector<std::int32_t> acc;
    std::vector<float> padded;
    std::vector<float> h_rows;
    std::vector<float> k_rows;
  };

  static std::size_t kernel_dim(std::span<const Tensor3> filters, std::size_t (Tensor3::*dim)() const noexcept) {
    if (filters.empty()) throw Error(Errc::invalid_argument, "at least one filter is required");
    return (filters.front().*dim)();
  }

  template <bool Scaled, class T>
  void run_impl(const Tensor3& input, T* out, std::size_t out_size) {
    if (input.channels() != channels_ || input.height() != height_ || input.width() != width_) {
      throw Error(Errc::dimension_mismatch, "input does not match the planned shape");
    }
    if (out_size != output_size()) throw Error(Errc::dimension_mismatch, "output buffer has the wrong size");
    parallel_for(packer_.shape().tiles_y, threads_, [&](std::size_t begin, std::size_t end, std::size_t worker) {
      for (std::size_t ty = begin; ty < end; ++ty) band<Scaled>(input, ty, scratch_[worker], out);
    });
  }

  template <bool Scaled, class T>
  void band(const Tensor3& input, std::size_t ty, Scratch& s, T* out) const {
    const std::size_t tiles_x = packer_.shape().tiles_x;
    const std::size_t sy = geom_.stride_y();
    const std::size_t sx = geom_.stride_x();
    const std::size_t oh = out_h();
    const std::size_t ow = out_w();
    const std::size_t acc_w = tiles_x * sx;
    const std::size_t y0 = ty * sy;
    const std::size_t rows = std::min(sy, oh - y0);

    // XNOR path: pad + binarize + pack this tile row of every channel.
    for (std::size_t ch = 0; ch < channels_; ++ch) {
      packer_.pack_row(input.channel(ch), ty, s.pack, s.tiles.data() + ch * tiles_x);
    }

    // K path: rows y0 .. y0+rows-1 of the box-filtered channel mean.
    if constexpr (Scaled) {
      const std::size_t h_count = rows + geom_.kernel_h() - 1;
      for (std::size_t r = 0; r < h_count; ++r) {
        const std::size_t py = y0 + r;
        float* h = s.h_rows.data() + r * ow;
        if (py >= pad_ && py < pad_ + height_) {
          // The padding columns of s.padded are never written and stay zero.
          detail::abs_mean_row(input, py - pad_, s.padded.data() + pad_);
          box_.horizontal(s.padded.data(), h);
        } else {
          box_.horizontal_zero(h);
        }
      }
      for (std::size_t dy = 0; dy < rows; ++dy) {
        box_.vertical(s.h_rows.data() + dy * ow, ow, s.k_rows.data() + dy * ow);
      }
    }

    for (std::size_t f = 0; f < filters_.size(); ++f) {
      const BinaryFilter& filter = filters_[f];
      std::fill(s.acc.begin(), s.acc.end(), 0);
      for (std::size_t tx = 0; tx < tiles_x; ++tx) {
        for (std::size_t ch = 0; ch < channels_; ++ch) {
          const Word image = s.tiles[ch * tiles_x + tx];
          std::int32_t* acc = s.acc.data() + tx * sx;
          if (tile_kernel_) {
            tile_kernel_(image, filter.weight_words[ch], filter.base_mask, acc, acc_w);
          } else {
            detail::accumulate_tile(geom_, image, filter.weight_words[ch], filter.base_mask, acc, acc_w);
          }
        }
      }
      T* dst = out + (f * oh + y0) * ow;
      for (std::size_t dy = 0; dy < rows; ++dy) {
        const std::int32_t* acc = s.acc.data() + dy * acc_w;
        if constexpr (Scaled) {
          const float* k = s.k_rows.data() + dy * ow;
          for (std::size_t x = 0; x < ow; ++x) dst[dy * ow + x] = detail::scale_value(acc[x], k[x], filter.alpha);
        } else {
          std::copy(acc, acc + ow, dst + dy * ow);
        }
      }
    }
  }

  std::size_t channels_;
  std::size_t height_;
  std::size_t width_;
  std::size_t pad_;
  TileGeometry geom_;
  ChannelTilePacker packer_;
  BoxFilterRows box_;
  detail::TileKernelFn tile_kernel_;
  std::vector<BinaryFilter> filters_;
  unsigned threads_ = 1;
  std::vector<Scratch> scratch_;
};

/// The same computation assembled from the individual stages (pad, sign,
/// pack, XNOR, channel mean, K, scale), one whole plane at a time.
inline IntOutputPlane convolve_signed_staged(const Tensor3& input, const Tensor3& filter, std::size_t pad,
                                             int word_bits = 64) {
  const TileGeometry geom(word_bits, filter.height(), filter.width());
  const Tensor3 padded = zero_pad(input, pad);
  std::vector<PackedTileGrid> grids;
  for (const auto& plane : sign_planes(padded)) grids.push_back(pack(plane, geom));
  const std::size_t out_h = padded.height() - geom.kernel_h() + 1;
  const std::size_t out_w = padded.width() - geom.kernel_w() + 1;
  return xnor_conv_multichannel(grids, make_binary_filter(sign_binarize(filter), geom), out_h, out_w);
}

inline Tensor2 convolve_staged(const Tensor3& input, const Tensor3& filter, std::size_t pad, int word_bits = 64) {
  const IntOutputPlane ints = convolve_signed_staged(input, filter, pad, word_bits);
  ScalingField field{compute_K(channel_abs_mean(input), filter.height(), filter.width(), pad),
                     sign_binarize(filter).alpha};
  return apply_scaling(ints, field);
}

}  // namespace xnorconv
