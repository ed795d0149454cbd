#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "xnorconv/error.hpp"
#include "xnorconv/tensor.hpp"

namespace xnorconv {

// sign(0) is +1, so bit value 1 always means +1 after packing.
constexpr std::int8_t sign_of(float v) noexcept { return v >= 0.0f ? 1 : -1; }

/// A 2-D plane whose entries are exactly +1 or -1.
class SignPlane {
 public:
  SignPlane() = default;

  SignPlane(std::size_t height, std::size_t width, std::vector<std::int8_t> signs)
      : height_(height), width_(width), signs_(std::move(signs)) {
    if (detail::checked_mul(height, width) != signs_.size()) {
      throw Error(Errc::size_mismatch, "sign plane length does not match h*w");
    }
    for (auto s : signs_) {
      if (s != 1 && s != -1) throw Error(Errc::invalid_argument, "sign plane entries must be +1 or -1");
    }
  }

  static SignPlane filled(std::size_t height, std::size_t width, std::int8_t sign) {
    return SignPlane(height, width, std::vector<std::int8_t>(height * width, sign));
  }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::span<const std::int8_t> signs() const noexcept { return signs_; }

  std::int8_t operator()(std::size_t y, std::size_t x) const { return signs_[y * width_ + x]; }

  friend bool operator==(const SignPlane&, const SignPlane&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<std::int8_t> signs_;
};

/// W ~= alpha * B for one filter: one sign plane per input channel and a
/// single scale shared by all of them.
struct BinaryWeightApprox {
  std::vector<SignPlane> signs;
  float alpha = 0.0f;
};

inline SignPlane sign_plane(std::span<const float> values, std::size_t height, std::size_t width) {
  std::vector<std::int8_t> s(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) s[i] = sign_of(values[i]);
  return SignPlane(height, width, std::move(s));
}

inline SignPlane sign_plane(const Tensor2& x) { return sign_plane(x.data(), x.height(), x.width()); }

inline std::vector<SignPlane> sign_planes(const Tensor3& t) {
  std::vector<SignPlane> out;
  out.reserve(t.channels());
  for (std::size_t ch = 0; ch < t.channels(); ++ch) out.push_back(sign_plane(t.channel(ch), t.height(), t.width()));
  return out;
}

/// Optimal binary approximation of a filter: B = sign(W), alpha = mean |W|.
/// The l1 norm is accumulated in double, in storage order, so alpha does not
/// depend on how callers schedule work.
inline BinaryWeightApprox sign_binarize(const Tensor3& w) {
  if (w.empty()) throw Error(Errc::invalid_argument, "cannot binarize an empty weight tensor");
  double l1 = 0.0;
  for (float v : w.data()) l1 += static_cast<double>(v < 0.0f ? -v : v);
  BinaryWeightApprox out;
  out.signs = sign_planes(w);
  out.alpha = static_cast<float>(l1 / static_cast<double>(w.size()));
  return out;
}

/// Combined scale of an input/weight product, gamma = beta * alpha.
inline double gamma(double alpha, double beta) {
  if (alpha < 0.0 || beta < 0.0) throw Error(Errc::invalid_argument, "scale factors must be non-negative");
  return alpha * beta;
}

}  // namespace xnorconv
