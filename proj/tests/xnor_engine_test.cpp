#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace xnorconv;

TEST(PopcountToSigned, Identity) {
  EXPECT_EQ(popcount_to_signed(9, 9), 9);
  EXPECT_EQ(popcount_to_signed(0, 9), -9);
  EXPECT_EQ(popcount_to_signed(5, 9), 1);
  EXPECT_THROW(popcount_to_signed(10, 9), Error);
}

TEST(XnorTile, Saturation) {
  const TileGeometry g(64, 3, 3);
  const auto all = xnor_tile(~Word{0}, g.base_mask(), g);
  ASSERT_EQ(all.size(), 36u);
  for (int v : all) EXPECT_EQ(v, 9);
  for (int v : xnor_tile(0, g.base_mask(), g)) EXPECT_EQ(v, -9);
  EXPECT_THROW(xnor_tile(0, ~Word{0}, g), Error);
}

TEST(XnorTile, MatchesWindowOracle) {
  std::mt19937_64 rng(31);
  for (int bits : {64, 32})
    for (std::size_t k : {1, 2, 3, 4, 5, 7}) {
      if (bits == 32 && k > 4) continue;
      const TileGeometry g(bits, k, k);
      for (int t = 0; t < 50; ++t) {
        const Word image = rng() & g.tile_mask();
        const Word weight = rng() & g.base_mask();
        const auto got = xnor_tile(image, weight, g);
        for (std::size_t dy = 0; dy < g.stride_y(); ++dy)
          for (std::size_t dx = 0; dx < g.stride_x(); ++dx)
            ASSERT_EQ(got[dy * g.stride_x() + dx], oracle::tile_window(image, weight, g, dy, dx))
                << bits << " k=" << k;
      }
    }
}

TEST(XnorTile, NegationSymmetry) {
  std::mt19937_64 rng(32);
  const TileGeometry g(64, 3, 3);
  for (int t = 0; t < 50; ++t) {
    const Word image = rng(), weight = rng() & g.base_mask();
    const auto a = xnor_tile(image, weight, g);
    const auto b = xnor_tile(~image, weight, g);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], -b[i]);
  }
}

namespace {

IntOutputPlane engine(const std::vector<SignPlane>& padded, const BinaryWeightApprox& w, int bits) {
  const TileGeometry g(bits, w.signs[0].height(), w.signs[0].width());
  std::vector<PackedTileGrid> grids;
  for (const auto& p : padded) grids.push_back(pack(p, g));
  const std::size_t oh = padded[0].height() - g.kernel_h() + 1, ow = padded[0].width() - g.kernel_w() + 1;
  return xnor_conv_multichannel(grids, make_binary_filter(w, g), oh, ow);
}

}  // namespace

TEST(XnorConv2d, UniformImage) {
  const TileGeometry g(64, 3, 3);
  const auto grid = pack(SignPlane::filled(18, 18, 1), g);
  BinaryWeightApprox w{{SignPlane::filled(3, 3, 1)}, 1.0f};
  const auto out = xnor_conv2d(grid, make_binary_filter(w, g), 0, 16, 16);
  for (auto v : out.values()) EXPECT_EQ(v, 9);
}

TEST(XnorConv2d, SingleNegativePixel) {
  const TileGeometry g(64, 3, 3);
  std::vector<std::int8_t> s(18 * 18, 1);
  s[9 * 18 + 7] = -1;
  const auto grid = pack(SignPlane(18, 18, s), g);
  BinaryWeightApprox w{{SignPlane::filled(3, 3, 1)}, 1.0f};
  const auto out = xnor_conv2d(grid, make_binary_filter(w, g), 0, 16, 16);
  int sevens = 0;
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 16; ++x) {
      const bool covers = y <= 9 && 9 <= y + 2 && x <= 7 && 7 <= x + 2;
      EXPECT_EQ(out(y, x), covers ? 7 : 9);
      sevens += covers;
    }
  EXPECT_EQ(sevens, 9);
}

TEST(XnorConv2d, MatchesReference) {
  std::mt19937_64 rng(33);
  for (int bits : {64, 32}) {
    const auto img = oracle::random_signs(rng, 34, 34);
    BinaryWeightApprox w{{oracle::random_signs(rng, 3, 3)}, 1.0f};
    const auto got = engine({img}, w, bits);
    const std::vector<SignPlane> in{img};
    EXPECT_EQ(got, sign_conv2d_int(in, w.signs, 0));
  }
}

TEST(XnorMultichannel, LinearityAndCancellation) {
  std::mt19937_64 rng(34);
  const auto img = oracle::random_signs(rng, 20, 20);
  const auto wt = oracle::random_signs(rng, 3, 3);
  const auto one = engine({img}, {{wt}, 1.0f}, 64);
  const auto two = engine({img, img}, {{wt, wt}, 1.0f}, 64);
  for (std::size_t i = 0; i < one.values().size(); ++i) EXPECT_EQ(two.values()[i], 2 * one.values()[i]);

  std::vector<std::int8_t> neg(img.signs().begin(), img.signs().end());
  for (auto& s : neg) s = static_cast<std::int8_t>(-s);
  const auto zero = engine({img, SignPlane(20, 20, neg)}, {{wt, wt}, 1.0f}, 64);
  for (auto v : zero.values()) EXPECT_EQ(v, 0);
}

TEST(XnorMultichannel, ThreeChannelsMatchReferenceWithInvariants) {
  std::mt19937_64 rng(35);
  for (int bits : {64, 32}) {
    std::vector<SignPlane> img, wt;
    for (int c = 0; c < 3; ++c) {
      img.push_back(oracle::random_signs(rng, 27, 31));
      wt.push_back(oracle::random_signs(rng, 3, 3));
    }
    const auto got = engine(img, {wt, 1.0f}, bits);
    EXPECT_EQ(got, sign_conv2d_int(img, wt, 0));
    for (auto v : got.values()) {
      EXPECT_LE(std::abs(v), 27);
      EXPECT_EQ(((v % 2) + 2) % 2, 1);  // 3 * 9 is odd
    }
  }
}

TEST(XnorMultichannel, ChannelMismatch) {
  const TileGeometry g(64, 3, 3);
  std::vector<PackedTileGrid> grids{pack(SignPlane::filled(10, 10, 1), g)};
  BinaryWeightApprox w{{SignPlane::filled(3, 3, 1), SignPlane::filled(3, 3, 1)}, 1.0f};
  try {
    xnor_conv_multichannel(grids, make_binary_filter(w, g), 8, 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::channel_mismatch);
  }
}
