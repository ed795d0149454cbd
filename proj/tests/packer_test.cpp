#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace xnorconv;

TEST(TileGeometry, Strides) {
  const TileGeometry g64(64, 3, 3);
  EXPECT_EQ(g64.stride_y(), 6u);
  EXPECT_EQ(g64.stride_x(), 6u);
  const TileGeometry g32(32, 3, 3);
  EXPECT_EQ(g32.tile_h(), 8u);
  EXPECT_EQ(g32.tile_w(), 4u);
  EXPECT_EQ(g32.stride_y(), 6u);
  EXPECT_EQ(g32.stride_x(), 2u);
  EXPECT_THROW(TileGeometry(16, 3, 3), Error);
  EXPECT_THROW(TileGeometry(64, 9, 3), Error);
  EXPECT_THROW(TileGeometry(32, 3, 5), Error);
  EXPECT_THROW(TileGeometry(64, 0, 1), Error);
}

TEST(TileGridShape, WorkedExamples) {
  EXPECT_EQ(tile_grid_shape(TileGeometry(64, 3, 3), 16, 16), (TileGridShape{3, 3}));
  EXPECT_EQ(tile_grid_shape(TileGeometry(64, 3, 3), 16, 16).count(), 9u);
  EXPECT_EQ(tile_grid_shape(TileGeometry(64, 3, 3), 6, 6), (TileGridShape{1, 1}));
  const auto s32 = tile_grid_shape(TileGeometry(32, 3, 3), 12, 12);
  EXPECT_EQ(s32, (TileGridShape{2, 6}));
  EXPECT_EQ(s32.count(), 12u);
  EXPECT_THROW(tile_grid_shape(TileGeometry(64, 3, 3), 0, 4), Error);
}

TEST(TileGridShape, MatchesPlacementEnumeration) {
  for (int bits : {64, 32}) {
    for (std::size_t k : {1, 3, 5, 7}) {
      if (bits == 32 && k > 4) continue;
      const TileGeometry g(bits, k, k);
      for (std::size_t out = 1; out <= 64; ++out) {
        const auto s = tile_grid_shape(g, out, out);
        EXPECT_EQ(s.tiles_y, oracle::placements(out, g.tile_h(), k)) << bits << " k=" << k << " out=" << out;
        EXPECT_EQ(s.tiles_x, oracle::placements(out, g.tile_w(), k)) << bits << " k=" << k << " out=" << out;
      }
    }
  }
}

TEST(Pack, AllOnesSaturates) {
  const auto grid = pack(SignPlane::filled(8, 8, 1), TileGeometry(64, 3, 3));
  ASSERT_EQ(grid.words().size(), 1u);
  EXPECT_EQ(grid.word(0, 0), 0xFFFF'FFFF'FFFF'FFFFull);
}

TEST(Pack, TopLeftIsBitZero) {
  std::vector<std::int8_t> s(64, -1);
  s[0] = 1;
  const auto grid = pack(SignPlane(8, 8, s), TileGeometry(64, 3, 3));
  EXPECT_EQ(grid.word(0, 0), 1u);
}

TEST(Pack, BitLayoutMatchesPlane) {
  std::mt19937_64 rng(21);
  for (int bits : {64, 32}) {
    const TileGeometry g(bits, 3, 3);
    const auto p = oracle::random_signs(rng, 19, 23);
    const auto grid = pack(p, g);
    for (std::size_t ty = 0; ty < grid.tiles_y(); ++ty)
      for (std::size_t tx = 0; tx < grid.tiles_x(); ++tx)
        for (std::size_t r = 0; r < g.tile_h(); ++r)
          for (std::size_t c = 0; c < g.tile_w(); ++c) {
            const std::size_t y = grid.origin_y(ty) + r, x = grid.origin_x(tx) + c;
            const bool bit = (grid.word(ty, tx) >> g.bit(r, c)) & 1u;
            const bool want = y < p.height() && x < p.width() && p(y, x) > 0;
            EXPECT_EQ(bit, want);
          }
  }
}

TEST(Pack, RoundTrip) {
  std::mt19937_64 rng(22);
  for (int bits : {64, 32})
    for (std::size_t k : {1, 3}) {
      for (int t = 0; t < 20; ++t) {
        const std::size_t h = 8 + rng() % 40, w = 8 + rng() % 40;
        const auto p = oracle::random_signs(rng, h, w);
        EXPECT_EQ(unpack(pack(p, TileGeometry(bits, k, k)), h, w), p);
      }
    }
  const auto p = oracle::random_signs(rng, 20, 20);
  EXPECT_EQ(unpack(pack(p, TileGeometry(64, 3, 3)), 20, 20), p);
}

TEST(Unpack, AllOnesGrid) {
  const TileGeometry g(64, 3, 3);
  const PackedTileGrid grid(g, 2, 2, std::vector<Word>(4, ~Word{0}));
  EXPECT_EQ(unpack(grid, 14, 14), SignPlane::filled(14, 14, 1));
}

TEST(Unpack, CorruptedOverlapIsDetected) {
  std::mt19937_64 rng(23);
  const TileGeometry g(64, 3, 3);
  const auto p = oracle::random_signs(rng, 16, 16);
  const auto grid = pack(p, g);
  std::vector<Word> words(grid.words().begin(), grid.words().end());
  // Column 6 of tile (0,0) is also column 0 of tile (0,1).
  words[0] ^= Word{1} << g.bit(0, 6);
  try {
    unpack(PackedTileGrid(g, grid.tiles_y(), grid.tiles_x(), words), 16, 16);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::inconsistent_overlap);
  }
}

TEST(ChannelTilePacker, MatchesStagedPacking) {
  std::mt19937_64 rng(24);
  for (int bits : {64, 32})
    for (std::size_t k : {1, 3}) {
      for (int t = 0; t < 10; ++t) {
        const std::size_t h = 1 + rng() % 80, w = 1 + rng() % 150, pad = k / 2;
        std::vector<float> v(h * w);
        for (auto& x : v) x = (rng() % 5 == 0) ? 0.0f : float(int(rng() % 3) - 1) * 0.5f;
        const Tensor3 img(1, h, w, v);
        const TileGeometry g(bits, k, k);
        const ChannelTilePacker packer(g, h, w, pad);
        const auto fused = packer.pack(img.channel(0));
        const auto staged = pack(sign_planes(zero_pad(img, pad))[0], g);
        ASSERT_EQ(fused.tiles_y(), staged.tiles_y());
        ASSERT_EQ(fused.tiles_x(), staged.tiles_x());
        EXPECT_TRUE(std::equal(fused.words().begin(), fused.words().end(), staged.words().begin()))
            << bits << " k=" << k << " " << h << "x" << w;
      }
    }
}
