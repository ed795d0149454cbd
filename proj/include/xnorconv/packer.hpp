#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#if defined(__AVX2__)
#include <immintrin.h>
#endif

#include "xnorconv/binarizer.hpp"
#include "xnorconv/error.hpp"
#include "xnorconv/tensor.hpp"

namespace xnorconv {

using Word = std::uint64_t;

/// Shape of one bit tile and the kernel it serves. A 64-bit word holds an
/// 8x8 tile, a 32-bit word an 8-row by 4-column tile. Tiles overlap by
/// kernel-1 pixels, so each one yields a stride_y x stride_x block of outputs.
class TileGeometry {
 public:
  TileGeometry(int word_bits, std::size_t kernel_h, std::size_t kernel_w)
      : word_bits_(word_bits), kernel_h_(kernel_h), kernel_w_(kernel_w) {
    if (word_bits == 64) {
      tile_h_ = 8;
      tile_w_ = 8;
    } else if (word_bits == 32) {
      tile_h_ = 8;
      tile_w_ = 4;
    } else {
      throw Error(Errc::invalid_argument, "word size must be 32 or 64 bits, got " + std::to_string(word_bits));
    }
    if (kernel_h == 0 || kernel_w == 0) throw Error(Errc::invalid_argument, "kernel dimensions must be >= 1");
    if (kernel_h > tile_h_ || kernel_w > tile_w_) {
      throw Error(Errc::invalid_argument, "kernel " + std::to_string(kernel_h) + "x" + std::to_string(kernel_w) +
                                              " does not fit a " + std::to_string(tile_h_) + "x" +
                                              std::to_string(tile_w_) + " tile");
    }
  }

  int word_bits() const noexcept { return word_bits_; }
  std::size_t tile_h() const noexcept { return tile_h_; }
  std::size_t tile_w() const noexcept { return tile_w_; }
  std::size_t kernel_h() const noexcept { return kernel_h_; }
  std::size_t kernel_w() const noexcept { return kernel_w_; }
  std::size_t kernel_area() const noexcept { return kernel_h_ * kernel_w_; }
  std::size_t stride_y() const noexcept { return tile_h_ - kernel_h_ + 1; }
  std::size_t stride_x() const noexcept { return tile_w_ - kernel_w_ + 1; }

  /// Bit index of in-tile pixel (r, c); bit 0 is the top-left pixel.
  std::size_t bit(std::size_t r, std::size_t c) const noexcept { return r * tile_w_ + c; }

  /// Ones on the kernel_h x kernel_w placement anchored at the tile's top-left.
  Word base_mask() const noexcept {
    Word m = 0;
    for (std::size_t r = 0; r < kernel_h_; ++r) {
      for (std::size_t c = 0; c < kernel_w_; ++c) m |= Word{1} << bit(r, c);
    }
    return m;
  }

  Word tile_mask() const noexcept { return word_bits_ == 64 ? ~Word{0} : (Word{1} << word_bits_) - 1; }

  friend bool operator==(const TileGeometry&, const TileGeometry&) = default;

 private:
  int word_bits_;
  std::size_t kernel_h_;
  std::size_t kernel_w_;
  std::size_t tile_h_ = 0;
  std::size_t tile_w_ = 0;
};

struct TileGridShape {
  std::size_t tiles_y = 0;
  std::size_t tiles_x = 0;

  std::size_t count() const noexcept { return tiles_y * tiles_x; }
  friend bool operator==(const TileGridShape&, const TileGridShape&) = default;
};

/// Number of tiles needed so every output pixel falls in exactly one tile's
/// valid block. Sizes that are not a multiple of the stride get a partially
/// used tail tile.
inline TileGridShape tile_grid_shape(const TileGeometry& geom, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) throw Error(Errc::invalid_argument, "output dimensions must be >= 1");
  return {(out_h + geom.stride_y() - 1) / geom.stride_y(), (out_w + geom.stride_x() - 1) / geom.stride_x()};
}

/// Overlapping bit tiles of a padded sign image, one word per tile, row-major
/// over tiles. Bit (r * tile_w + c) of a tile is 1 iff the pixel at
/// (origin_y + r, origin_x + c) is +1; pixels past the image edge are 0.
class PackedTileGrid {
 public:
  PackedTileGrid(TileGeometry geometry, std::size_t tiles_y, std::size_t tiles_x, std::vector<Word> words)
      : geometry_(geometry), tiles_y_(tiles_y), tiles_x_(tiles_x), words_(std::move(words)) {
    if (words_.size() != tiles_y * tiles_x) throw Error(Errc::size_mismatch, "word count does not match tile grid");
  }

  const TileGeometry& geometry() const noexcept { return geometry_; }
  std::size_t tiles_y() const noexcept { return tiles_y_; }
  std::size_t tiles_x() const noexcept { return tiles_x_; }
  std::span<const Word> words() const noexcept { return words_; }
  Word word(std::size_t ty, std::size_t tx) const { return words_[ty * tiles_x_ + tx]; }

  std::size_t origin_y(std::size_t ty) const noexcept { return ty * geometry_.stride_y(); }
  std::size_t origin_x(std::size_t tx) const noexcept { return tx * geometry_.stride_x(); }

 private:
  TileGeometry geometry_;
  std::size_t tiles_y_;
  std::size_t tiles_x_;
  std::vector<Word> words_;
};

/// Packs an already padded sign plane. The plane is treated as the input of a
/// valid (unpadded) correlation, so its output is (h-kh+1) x (w-kw+1).
inline PackedTileGrid pack(const SignPlane& signs, const TileGeometry& geom) {
  if (signs.height() < geom.kernel_h() || signs.width() < geom.kernel_w()) {
    throw Error(Errc::invalid_argument, "sign plane smaller than the kernel");
  }
  const auto shape =
      tile_grid_shape(geom, signs.height() - geom.kernel_h() + 1, signs.width() - geom.kernel_w() + 1);
  std::vector<Word> words(shape.count(), 0);
  for (std::size_t ty = 0; ty < shape.tiles_y; ++ty) {
    for (std::size_t tx = 0; tx < shape.tiles_x; ++tx) {
      const std::size_t oy = ty * geom.stride_y();
      const std::size_t ox = tx * geom.stride_x();
      Word w = 0;
      for (std::size_t r = 0; r < geom.tile_h(); ++r) {
        for (std::size_t c = 0; c < geom.tile_w(); ++c) {
          const std::size_t y = oy + r;
          const std::size_t x = ox + c;
          if (y < signs.height() && x < signs.width() && signs(y, x) > 0) w |= Word{1} << geom.bit(r, c);
        }
      }
      words[ty * shape.tiles_x + tx] = w;
    }
  }
  return PackedTileGrid(geom, shape.tiles_y, shape.tiles_x, std::move(words));
}

/// Inverse of pack over an h x w plane. Every pixel is read from each tile that
/// covers it, and all readings must agree.
inline SignPlane unpack(const PackedTileGrid& grid, std::size_t h, std::size_t w) {
  const auto& geom = grid.geometry();
  std::vector<std::int8_t> out(h * w, 0);
  for (std::size_t ty = 0; ty < grid.tiles_y(); ++ty) {
    for (std::size_t tx = 0; tx < grid.tiles_x(); ++tx) {
      const Word word = grid.word(ty, tx);
      for (std::size_t r = 0; r < geom.tile_h(); ++r) {
        for (std::size_t c = 0; c < geom.tile_w(); ++c) {
          const std::size_t y = grid.origin_y(ty) + r;
          const std::size_t x = grid.origin_x(tx) + c;
          if (y >= h || x >= w) continue;
          const std::int8_t s = ((word >> geom.bit(r, c)) & 1u) ? 1 : -1;
          auto& dst = out[y * w + x];
          if (dst != 0 && dst != s) {
            throw Error(Errc::inconsistent_overlap, "tiles disagree at pixel (" + std::to_string(y) + ", " +
                                                        std::to_string(x) + ")");
          }
          dst = s;
        }
      }
    }
  }
  if (std::find(out.begin(), out.end(), std::int8_t{0}) != out.end()) {
    throw Error(Errc::dimension_mismatch, "grid does not cover the requested plane");
  }
  return SignPlane(h, w, std::move(out));
}

// ---------------------------------------------------------------------------
// Fused pad + binarize + pack, working one tile row at a time straight from
// the real-valued channel. Produces the same words as
// pack(sign_plane(zero_pad(x)), geom).
// ---------------------------------------------------------------------------

namespace detail {

inline std::size_t bit_words(std::size_t bits) { return (bits + 63) / 64; }

/// Bit i of the output is 1 iff row[i] >= 0. Unused high bits of the last
/// word are cleared.
inline void sign_bits(std::span<const float> row, Word* out) {
  const std::size_t n = row.size();
  std::size_t i = 0;
#if defined(__AVX2__)
  const __m256 zero = _mm256_setzero_ps();
  for (; i + 64 <= n; i += 64) {
    Word w = 0;
    for (int j = 0; j < 8; ++j) {
      const __m256 v = _mm256_loadu_ps(row.data() + i + 8 * j);
      const auto m = static_cast<unsigned>(_mm256_movemask_ps(_mm256_cmp_ps(v, zero, _CMP_GE_OQ)));
      w |= static_cast<Word>(m) << (8 * j);
    }
    out[i / 64] = w;
  }
#endif
  for (; i < n; i += 64) {
    const std::size_t end = std::min(n, i + 64);
    Word w = 0;
    for (std::size_t j = i; j < end; ++j) w |= static_cast<Word>(row[j] >= 0.0f) << (j - i);
    out[i / 64] = w;
  }
}

inline void set_bit_range(Word* bits, std::size_t lo, std::size_t hi) {
  for (std::size_t i = lo; i < hi;) {
    const std::size_t word = i / 64;
    const std::size_t off = i % 64;
    const std::size_t take = std::min<std::size_t>(64 - off, hi - i);
    const Word m = take == 64 ? ~Word{0} : ((Word{1} << take) - 1) << off;
    bits[word] |= m;
    i += take;
  }
}

/// `len` bits starting at bit `pos` (len <= 57, so one unaligned read suffices
/// across at most two words).
inline Word extract_bits(const Word* bits, std::size_t pos, std::size_t len) {
  const std::size_t word = pos / 64;
  const std::size_t off = pos % 64;
  Word v = bits[word] >> off;
  if (off != 0) v |= bits[word + 1] << (64 - off);
  return v & ((Word{1} << len) - 1);
}

}  // namespace detail

/// Scratch-based packer for one channel plane of a real tensor with implicit
/// zero padding. Padding pixels are 0 and therefore pack as +1.
class ChannelTilePacker {
 public:
  ChannelTilePacker(const TileGeometry& geom, std::size_t height, std::size_t width, std::size_t pad)
      : geom_(geom), height_(height), width_(width), pad_(pad) {
    padded_h_ = height + 2 * pad;
    padded_w_ = width + 2 * pad;
    if (padded_h_ < geom.kernel_h() || padded_w_ < geom.kernel_w()) {
      throw Error(Errc::invalid_argument, "padded input smaller than the kernel");
    }
    out_h_ = padded_h_ - geom.kernel_h() + 1;
    out_w_ = padded_w_ - geom.kernel_w() + 1;
    shape_ = tile_grid_shape(geom, out_h_, out_w_);
    // Room for the furthest tile column plus one spare word for unaligned reads.
    const std::size_t span_bits = std::max(padded_w_, shape_.tiles_x * geom.stride_x() + geom.tile_w());
    row_words_ = detail::bit_words(span_bits) + 1;
    input_words_ = detail::bit_words(width) + 1;
  }

  const TileGeometry& geometry() const noexcept { return geom_; }
  const TileGridShape& shape() const noexcept { return shape_; }
  std::size_t out_h() const noexcept { return out_h_; }
  std::size_t out_w() const noexcept { return out_w_; }

  /// Scratch words needed by pack_row.
  std::size_t scratch_words() const noexcept { return geom_.tile_h() * row_words_ + input_words_; }

  /// Writes the tiles_x words of tile row `ty` for channel plane `plane`
  /// (height x width values, row-major).
  void pack_row(std::span<const float> plane, std::size_t ty, std::span<Word> scratch, Word* out) const {
    Word* rows = scratch.data();
    Word* input_bits = rows + geom_.tile_h() * row_words_;
    const std::size_t oy = ty * geom_.stride_y();
    for (std::size_t r = 0; r < geom_.tile_h(); ++r) padded_row_bits(plane, oy + r, input_bits, rows + r * row_words_);

    const std::size_t tw = geom_.tile_w();
    for (std::size_t tx = 0; tx < shape_.tiles_x; ++tx) {
      const std::size_t ox = tx * geom_.stride_x();
      Word w = 0;
      for (std::size_t r = 0; r < geom_.tile_h(); ++r) {
        w |= detail::extract_bits(rows + r * row_words_, ox, tw) << (r * tw);
      }
      out[tx] = w;
    }
  }

  PackedTileGrid pack(std::span<const float> plane) const {
    std::vector<Word> scratch(scratch_words());
    std::vector<Word> words(shape_.count());
    for (std::size_t ty = 0; ty < shape_.tiles_y; ++ty) pack_row(plane, ty, scratch, words.data() + ty * shape_.tiles_x);
    return PackedTileGrid(geom_, shape_.tiles_y, shape_.tiles_x, std::move(words));
  }

 private:
  void padded_row_bits(std::span<const float> plane, std::size_t py, Word* input_bits, Word* dst) const {
    std::fill(dst, dst + row_words_, Word{0});
    if (py >= padded_h_) return;  // tail row past the padded image
    if (py < pad_ || py >= pad_ + height_) {
      detail::set_bit_range(dst, 0, padded_w_);
      return;
    }
    const std::size_t y = py - pad_;
    detail::sign_bits(plane.subspan(y * width_, width_), input_bits);
    const std::size_t n = detail::bit_words(width_);
    const std::size_t base = pad_ / 64;
    const std::size_t sh = pad_ % 64;
    for (std::size_t i = 0; i < n; ++i) {
      dst[i + base] |= input_bits[i] << sh;
      if (sh != 0) dst[i + base + 1] |= input_bits[i] >> (64 - sh);
    }
    detail::set_bit_range(dst, 0, pad_);
    detail::set_bit_range(dst, pad_ + width_, padded_w_);
  }

  TileGeometry geom_;
  std::size_t height_;
  std::size_t width_;
  std::size_t pad_;
  std::size_t padded_h_ = 0;
  std::size_t padded_w_ = 0;
  std::size_t out_h_ = 0;
  std::size_t out_w_ = 0;
  TileGridShape shape_;
  std::size_t row_words_ = 0;
  std::size_t input_words_ = 0;
};

}  // namespace xnorconv
