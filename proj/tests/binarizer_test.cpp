#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace xnorconv;

TEST(SignBinarize, WorkedExample) {
  const Tensor3 w(1, 3, 3, {1, -2, 3, -4, 5, -6, 7, -8, 9});
  const auto b = sign_binarize(w);
  EXPECT_FLOAT_EQ(b.alpha, 5.0f);
  ASSERT_EQ(b.signs.size(), 1u);
  const std::vector<std::int8_t> want{1, -1, 1, -1, 1, -1, 1, -1, 1};
  EXPECT_TRUE(std::equal(want.begin(), want.end(), b.signs[0].signs().begin()));
}

TEST(SignBinarize, AllZeros) {
  const auto b = sign_binarize(Tensor3::zeros(2, 3, 3));
  EXPECT_EQ(b.alpha, 0.0f);
  for (const auto& p : b.signs)
    for (auto s : p.signs()) EXPECT_EQ(s, 1);
}

TEST(SignBinarize, EmptyThrows) { EXPECT_THROW(sign_binarize(Tensor3::zeros(0, 3, 3)), Error); }

namespace {

double recon_error(const Tensor3& w, const BinaryWeightApprox& b, double alpha) {
  double e = 0.0;
  std::size_t i = 0;
  for (const auto& p : b.signs)
    for (auto s : p.signs()) {
      const double d = w.data()[i++] - alpha * s;
      e += d * d;
    }
  return e;
}

}  // namespace

TEST(SignBinarize, AlphaMatchesOracleAndIsLocallyOptimal) {
  std::mt19937_64 rng(11);
  const Tensor3 w = oracle::random_tensor(rng, 4, 3, 3);
  const auto b = sign_binarize(w);
  EXPECT_NEAR(b.alpha, oracle::alpha(w), 1e-6);
  const double best = recon_error(w, b, b.alpha);
  std::uniform_real_distribution<double> mag(1e-3, 0.5);
  for (int i = 0; i < 100; ++i) {
    const double delta = (rng() & 1u) ? mag(rng) : -mag(rng);
    EXPECT_LE(best, recon_error(w, b, b.alpha * (1.0 + delta)));
  }
}

TEST(SignBinarize, SignsMaximiseInnerProduct) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor3 w = oracle::random_tensor(rng, 1, 2, 5);
    const auto b = sign_binarize(w);
    double got = 0.0;
    for (std::size_t i = 0; i < 10; ++i) got += w.data()[i] * b.signs[0].signs()[i];
    double best = -1e300;
    for (unsigned m = 0; m < (1u << 10); ++m) {
      double s = 0.0;
      for (std::size_t i = 0; i < 10; ++i) s += w.data()[i] * (((m >> i) & 1u) ? 1.0 : -1.0);
      best = std::max(best, s);
    }
    EXPECT_DOUBLE_EQ(got, best);
  }
}

TEST(SignPlane, ZeroIsPositive) {
  const auto p = sign_plane(Tensor2(2, 2, {0.5f, -0.5f, 0.0f, -0.0f}));
  const std::vector<std::int8_t> want{1, -1, 1, 1};
  EXPECT_TRUE(std::equal(want.begin(), want.end(), p.signs().begin()));
}

TEST(SignPlane, AllNegative) {
  const auto p = sign_plane(Tensor2::filled(3, 4, -0.25f));
  for (auto s : p.signs()) EXPECT_EQ(s, -1);
}

TEST(SignPlane, RejectsNonSigns) { EXPECT_THROW(SignPlane(1, 2, {1, 0}), Error); }

TEST(Gamma, Product) {
  EXPECT_DOUBLE_EQ(gamma(5.0, 0.2), 5.0 * 0.2);
  EXPECT_EQ(gamma(0.0, 123.0), 0.0);
  EXPECT_THROW(gamma(-1.0, 1.0), Error);
}

TEST(Gamma, EqualsMeanProductOnConstantMagnitudes) {
  // |X| and |W| constant: (1/n) sum |X_i||W_i| = beta * alpha exactly.
  std::mt19937_64 rng(13);
  for (int t = 0; t < 20; ++t) {
    const double a = std::ldexp(double(1 + rng() % 64), -int(rng() % 6));
    const double b = std::ldexp(double(1 + rng() % 64), -int(rng() % 6));
    const std::size_t n = 9;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += b * a;
    EXPECT_EQ(gamma(a, b), s / double(n));
  }
}
