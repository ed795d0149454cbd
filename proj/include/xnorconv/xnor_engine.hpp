#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xnorconv/binarizer.hpp"
#include "xnorconv/error.hpp"
#include "xnorconv/packer.hpp"

namespace xnorconv {

/// Integer result of a sign convolution, before scaling.
class IntOutputPlane {
 public:
  IntOutputPlane() = default;

  IntOutputPlane(std::size_t height, std::size_t width, std::vector<std::int32_t> values)
      : height_(height), width_(width), values_(std::move(values)) {
    if (height * width != values_.size()) throw Error(Errc::size_mismatch, "plane length does not match h*w");
  }

  static IntOutputPlane zeros(std::size_t height, std::size_t width) {
    return IntOutputPlane(height, width, std::vector<std::int32_t>(height * width, 0));
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::span<const std::int32_t> values() const noexcept { return values_; }
  std::span<std::int32_t> values() noexcept { return values_; }

  std::int32_t operator()(std::size_t y, std::size_t x) const { return values_[y * width_ + x]; }
  std::int32_t& operator()(std::size_t y, std::size_t x) { return values_[y * width_ + x]; }

  friend bool operator==(const IntOutputPlane&, const IntOutputPlane&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::int32_t> values_;
};

/// One packed filter. weight_words[ch] holds channel ch's kernel signs at the
/// tile's top-left placement, in the same bit layout as PackedTileGrid.
struct BinaryFilter {
  TileGeometry geometry;
  std::vector<Word> weight_words;
  Word base_mask = 0;
  float alpha = 0.0f;

  std::size_t channels() const noexcept { return weight_words.size(); }
};

inline BinaryFilter make_binary_filter(const BinaryWeightApprox& approx, const TileGeometry& geom) {
  BinaryFilter f{geom, {}, geom.base_mask(), approx.alpha};
  f.weight_words.reserve(approx.signs.size());
  for (const auto& plane : approx.signs) {
    if (plane.height() != geom.kernel_h() || plane.width() != geom.kernel_w()) {
      throw Error(Errc::geometry_mismatch, "weight plane does not match the tile geometry's kernel");
    }
    Word w = 0;
    for (std::size_t r = 0; r < geom.kernel_h(); ++r) {
      for (std::size_t c = 0; c < geom.kernel_w(); ++c) {
        if (plane(r, c) > 0) w |= Word{1} << geom.bit(r, c);
      }
    }
    f.weight_words.push_back(w);
  }
  return f;
}

/// Signed sum of k_area +-1 products from the count of agreeing bits.
inline std::int32_t popcount_to_signed(std::size_t agreements, std::size_t k_area) {
  if (agreements > k_area) throw Error(Errc::invalid_argument, "popcount exceeds kernel area");
  return static_cast<std::int32_t>(2 * agreements) - static_cast<std::int32_t>(k_area);
}

namespace detail {

// Window (dy, dx) is brought to the weight placement with one right shift of
// dy*tile_w + dx. Masked XOR counts disagreements d, and the signed sum is
// k_area - 2d, which equals 2*popcount(XNOR & mask) - k_area.
template <std::size_t TileW>
inline void accumulate_tile(Word image, Word weight, Word mask, std::int32_t k_area, std::size_t stride_y,
                            std::size_t stride_x, std::int32_t* acc, std::size_t acc_stride) {
  for (std::size_t dy = 0; dy < stride_y; ++dy) {
    const Word row = image >> (dy * TileW);
    std::int32_t* out = acc + dy * acc_stride;
    for (std::size_t dx = 0; dx < stride_x; ++dx) {
      out[dx] += k_area - 2 * std::popcount(((row >> dx) ^ weight) & mask);
    }
  }
}

// Fully unrolled form for the common square kernels.
template <std::size_t TileW, std::size_t TileH, std::size_t K>
inline void accumulate_tile_fixed(Word image, Word weight, Word mask, std::int32_t* acc, std::size_t acc_stride) {
  constexpr std::size_t sy = TileH - K + 1;
  constexpr std::size_t sx = TileW - K + 1;
  constexpr auto k_area = static_cast<std::int32_t>(K * K);
  [&]<std::size_t... Dy>(std::index_sequence<Dy...>) {
    (([&]<std::size_t... Dx>(std::index_sequence<Dx...>) {
       const Word row = image >> (Dy * TileW);
       std::int32_t* out = acc + Dy * acc_stride;
       ((out[Dx] += k_area - 2 * std::popcount(((row >> Dx) ^ weight) & mask)), ...);
     }(std::make_index_sequence<sx>{})),
     ...);
  }(std::make_index_sequence<sy>{});
}

using TileKernelFn = void (*)(Word, Word, Word, std::int32_t*, std::size_t);

/// Unrolled kernel for this geometry, or nullptr when none is instantiated.
inline TileKernelFn fixed_tile_kernel(const TileGeometry& geom) {
  if (geom.kernel_h() != geom.kernel_w()) return nullptr;
  const std::size_t k = geom.kernel_h();
  if (geom.tile_w() == 8) {
    switch (k) {
      case 1: return &accumulate_tile_fixed<8, 8, 1>;
      case 3: return &accumulate_tile_fixed<8, 8, 3>;
      case 5: return &accumulate_tile_fixed<8, 8, 5>;
      case 7: return &accumulate_tile_fixed<8, 8, 7>;
      default: return nullptr;
    }
  }
  switch (k) {
    case 1: return &accumulate_tile_fixed<4, 8, 1>;
    case 3: return &accumulate_tile_fixed<4, 8, 3>;
    default: return nullptr;
  }
}

inline void accumulate_tile(const TileGeometry& geom, Word image, Word weight, Word mask, std::int32_t* acc,
                            std::size_t acc_stride) {
  if (const auto fixed = fixed_tile_kernel(geom)) {
    fixed(image, weight, mask, acc, acc_stride);
    return;
  }
  const auto k_area = static_cast<std::int32_t>(geom.kernel_area());
  if (geom.tile_w() == 8) {
    accumulate_tile<8>(image, weight, mask, k_area, geom.stride_y(), geom.stride_x(), acc, acc_stride);
  } else {
    accumulate_tile<4>(image, weight, mask, k_area, geom.stride_y(), geom.stride_x(), acc, acc_stride);
  }
}

}  // namespace detail

/// All stride_y * stride_x window results of one tile, row-major.
inline std::vector<std::int32_t> xnor_tile(Word image_word, Word weight_word, const TileGeometry& geom) {
  const Word mask = geom.base_mask();
  if ((weight_word & ~mask) != 0) throw Error(Errc::invalid_argument, "weight word has bits outside the kernel mask");
  std::vector<std::int32_t> out(geom.stride_y() * geom.stride_x(), 0);
  detail::accumulate_tile(geom, image_word, weight_word, mask, out.data(), geom.stride_x());
  return out;
}

namespace detail {

inline void check_grid(const PackedTileGrid& grid, const BinaryFilter& filter, std::size_t out_h, std::size_t out_w) {
  if (!(grid.geometry() == filter.geometry)) throw Error(Errc::geometry_mismatch, "grid and filter geometries differ");
  const auto shape = tile_grid_shape(grid.geometry(), out_h, out_w);
  if (shape.tiles_y != grid.tiles_y() || shape.tiles_x != grid.tiles_x()) {
    throw Error(Errc::geometry_mismatch, "tile grid does not match the output dimensions");
  }
}

// Adds one channel's results into `out`; tail positions past out_h/out_w are dropped.
inline void add_channel(const PackedTileGrid& grid, Word weight, Word mask, IntOutputPlane& out) {
  const auto& geom = grid.geometry();
  const std::size_t sy = geom.stride_y();
  const std::size_t sx = geom.stride_x();
  std::vector<std::int32_t> block(sy * sx);
  for (std::size_t ty = 0; ty < grid.tiles_y(); ++ty) {
    for (std::size_t tx = 0; tx < grid.tiles_x(); ++tx) {
      std::fill(block.begin(), block.end(), 0);
      accumulate_tile(geom, grid.word(ty, tx), weight, mask, block.data(), sx);
      for (std::size_t dy = 0; dy < sy; ++dy) {
        const std::size_t y = ty * sy + dy;
        if (y >= out.height()) break;
        for (std::size_t dx = 0; dx < sx; ++dx) {
          const std::size_t x = tx * sx + dx;
          if (x >= out.width()) break;
          out(y, x) += block[dy * sx + dx];
        }
      }
    }
  }
}

}  // namespace detail

/// Sign correlation of one packed channel with one channel of `filter`.
inline IntOutputPlane xnor_conv2d(const PackedTileGrid& grid, const BinaryFilter& filter, std::size_t channel,
                                  std::size_t out_h, std::size_t out_w) {
  detail::check_grid(grid, filter, out_h, out_w);
  if (channel >= filter.channels()) throw Error(Errc::channel_mismatch, "filter has no such channel");
  auto out = IntOutputPlane::zeros(out_h, out_w);
  detail::add_channel(grid, filter.weight_words[channel], filter.base_mask, out);
  return out;
}

/// Sum over input channels, accumulated in channel order.
inline IntOutputPlane xnor_conv_multichannel(std::span<const PackedTileGrid> grids, const BinaryFilter& filter,
                                             std::size_t out_h, std::size_t out_w) {
  if (grids.size() != filter.channels()) {
    throw Error(Errc::channel_mismatch, "got " + std::to_string(grids.size()) + " packed channels for a " +
                                            std::to_string(filter.channels()) + "-channel filter");
  }
  auto out = IntOutputPlane::zeros(out_h, out_w);
  for (std::size_t ch = 0; ch < grids.size(); ++ch) {
    detail::check_grid(grids[ch], filter, out_h, out_w);
    detail::add_channel(grids[ch], filter.weight_words[ch], filter.base_mask, out);
  }
  return out;
}

}  // namespace xnorconv
