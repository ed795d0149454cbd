#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "xnorconv/binarizer.hpp"
#include "xnorconv/pipeline.hpp"
#include "xnorconv/reference.hpp"
#include "xnorconv/scaling.hpp"
#include "xnorconv/tensor.hpp"

namespace xnorconv {

struct VerifySummary {
  std::size_t instances = 0;
  std::size_t failures = 0;
  std::string first_failure;

  bool ok() const noexcept { return failures == 0; }
};

/// One randomized instance of the equivalence suite.
struct VerifyCase {
  Tensor3 input;
  Tensor3 weights;
  std::size_t pad = 0;
  int word_bits = 64;
};

/// Sizes 8..64, 1..4 channels, k in {1, 3}; about 10% of input values are
/// exact zeros so the sign(0) convention is exercised.
inline VerifyCase random_verify_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> size(8, 64);
  std::uniform_int_distribution<std::size_t> chans(1, 4);
  std::uniform_real_distribution<float> val(-1.0f, 1.0f);
  std::bernoulli_distribution zero(0.1);
  const std::size_t h = size(rng);
  const std::size_t w = size(rng);
  const std::size_t c = chans(rng);
  const std::size_t k = (rng() & 1u) ? 3 : 1;
  const int word_bits = (rng() & 1u) ? 64 : 32;

  std::vector<float> in(c * h * w);
  for (auto& v : in) v = zero(rng) ? 0.0f : val(rng);
  std::vector<float> wt(c * k * k);
  for (auto& v : wt) v = val(rng);
  return {Tensor3(c, h, w, std::move(in)), Tensor3(c, k, k, std::move(wt)), k / 2, word_bits};
}

/// Returns an empty string when the engine agrees with the reference on `tc`,
/// otherwise a description of the first disagreement.
inline std::string check_case(const VerifyCase& tc) {
  const std::size_t k_h = tc.weights.height();
  const std::size_t k_w = tc.weights.width();
  const BinaryWeightApprox approx = sign_binarize(tc.weights);
  const IntOutputPlane ref = sign_conv2d_int(sign_planes(tc.input), approx.signs, tc.pad);

  const auto bound = static_cast<std::int32_t>(tc.input.channels() * k_h * k_w);
  const auto parity = static_cast<std::int32_t>((tc.input.channels() * k_h * k_w) % 2);
  for (std::int32_t v : ref.values()) {
    if (v > bound || v < -bound || std::abs(v % 2) != parity) return "reference violates parity/bound";
  }

  if (convolve_signed_staged(tc.input, tc.weights, tc.pad, tc.word_bits) != ref) {
    return "staged XNOR engine differs from reference sign convolution";
  }

  XnorConvolution plan(tc.input.channels(), tc.input.height(), tc.input.width(), std::span(&tc.weights, 1), tc.pad,
                       tc.word_bits);
  std::vector<std::int32_t> ints(plan.output_size());
  plan.run_signed(tc.input, ints);
  if (!std::equal(ints.begin(), ints.end(), ref.values().begin())) {
    return "fused XNOR pipeline differs from reference sign convolution";
  }

  const ScalingField field{compute_K(channel_abs_mean(tc.input), k_h, k_w, tc.pad), approx.alpha};
  const Tensor2 expected = apply_scaling(ref, field);
  const Tensor3 got = plan.run(tc.input);
  if (!std::equal(got.data().begin(), got.data().end(), expected.data().begin())) {
    return "scaled pipeline output differs from reference composition";
  }
  return {};
}

inline VerifySummary run_verification(std::uint64_t seed, std::size_t instances) {
  std::mt19937_64 rng(seed);
  VerifySummary summary;
  for (std::size_t i = 0; i < instances; ++i) {
    const VerifyCase tc = random_verify_case(rng);
    ++summary.instances;
    const std::string why = check_case(tc);
    if (!why.empty()) {
      if (summary.failures++ == 0) {
        std::ostringstream os;
        os << "instance " << i << " (" << tc.input.channels() << "x" << tc.input.height() << "x" << tc.input.width()
           << ", k=" << tc.weights.height() << ", " << tc.word_bits << "-bit): " << why;
        summary.first_failure = os.str();
      }
    }
  }
  return summary;
}

}  // namespace xnorconv
