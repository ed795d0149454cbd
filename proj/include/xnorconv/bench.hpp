#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "xnorconv/binarizer.hpp"
#include "xnorconv/error.hpp"
#include "xnorconv/parallel.hpp"
#include "xnorconv/pipeline.hpp"
#include "xnorconv/reference.hpp"
#include "xnorconv/tensor.hpp"

namespace xnorconv::bench {

enum class Format { table, csv };

struct BenchConfig {
  std::vector<std::size_t> sizes{256, 512, 1024, 2048};
  std::size_t kernel = 3;
  std::size_t channels = 1;
  std::size_t repeats = 100;
  std::size_t warmup = 10;
  unsigned threads = 0;  // 0 = all hardware threads
  int word_bits = 64;
  std::uint64_t seed = 42;
  Format format = Format::table;
};

inline void validate(const BenchConfig& cfg) {
  if (cfg.sizes.empty()) throw Error(Errc::invalid_argument, "at least one input size is required");
  if (std::find(cfg.sizes.begin(), cfg.sizes.end(), std::size_t{0}) != cfg.sizes.end()) {
    throw Error(Errc::invalid_argument, "input sizes must be >= 1");
  }
  if (cfg.repeats < 1) throw Error(Errc::invalid_argument, "repeats must be >= 1");
  if (cfg.kernel % 2 == 0) throw Error(Errc::invalid_argument, "kernel size must be odd");
  if (cfg.channels < 1) throw Error(Errc::invalid_argument, "channels must be >= 1");
  // Throws for unsupported word sizes and kernels that do not fit a tile.
  TileGeometry(cfg.word_bits, cfg.kernel, cfg.kernel);
}

inline constexpr std::string_view kVanilla1 = "vanilla-1t";
inline constexpr std::string_view kVanillaMt = "vanilla-mt";
inline constexpr std::string_view kXnor1 = "xnor-1t";
inline constexpr std::string_view kXnorMt = "xnor-mt";

/// Every speed-up is measured against the vanilla run with the same threading,
/// except vanilla-mt which is compared with vanilla-1t.
inline std::string_view baseline_for(std::string_view impl) {
  if (impl == kXnorMt) return kVanillaMt;
  return kVanilla1;
}

struct BenchRow {
  std::string impl;
  std::size_t size = 0;
  double mean_ms = 0.0;
  double std_ms = 0.0;
  double speedup = 0.0;

  friend bool operator==(const BenchRow&, const BenchRow&) = default;
};

struct BenchReport {
  std::vector<BenchRow> rows;

  const BenchRow* find(std::string_view impl, std::size_t size) const {
    for (const auto& r : rows) {
      if (r.impl == impl && r.size == size) return &r;
    }
    return nullptr;
  }
};

struct Timing {
  double mean_ms = 0.0;
  double std_ms = 0.0;
};

namespace detail {

inline Timing summarize(const std::vector<double>& ms) {
  double mean = 0.0;
  for (double m : ms) mean += m;
  mean /= static_cast<double>(ms.size());
  double var = 0.0;
  for (double m : ms) var += (m - mean) * (m - mean);
  const double sd = ms.size() > 1 ? std::sqrt(var / static_cast<double>(ms.size() - 1)) : 0.0;
  return {mean, sd};
}

}  // namespace detail

/// Times several candidates in interleaved rounds: every round runs each
/// candidate once, starting from a different one each round, so slow drift in
/// machine load affects all of them alike. `warmup` untimed rounds come first.
inline std::vector<Timing> time_interleaved(std::size_t warmup, std::size_t repeats,
                                            const std::vector<std::function<void()>>& fns) {
  const std::size_t n = fns.size();
  for (std::size_t r = 0; r < warmup; ++r) {
    for (const auto& fn : fns) fn();
  }
  std::vector<std::vector<double>> ms(n, std::vector<double>(repeats));
  for (std::size_t r = 0; r < repeats; ++r) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t i = (r + j) % n;
      const auto t0 = std::chrono::steady_clock::now();
      fns[i]();
      const auto t1 = std::chrono::steady_clock::now();
      ms[i][r] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
  }
  std::vector<Timing> out;
  for (const auto& m : ms) out.push_back(detail::summarize(m));
  return out;
}

inline Timing time_runs(std::size_t warmup, std::size_t repeats, const std::function<void()>& fn) {
  return time_interleaved(warmup, repeats, {fn}).front();
}

/// Uniform [-1, 1] tensor; the stream depends only on (seed, tag).
inline Tensor3 random_tensor(std::size_t c, std::size_t h, std::size_t w, std::uint64_t seed, std::uint64_t tag) {
  std::mt19937_64 rng(seed ^ (tag * 0x9E3779B97F4A7C15ull));
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<float> v(c * h * w);
  for (auto& x : v) x = dist(rng);
  return Tensor3(c, h, w, std::move(v));
}

/// Constant-magnitude tensor: every entry is +magnitude or -magnitude. On such
/// inputs with constant-magnitude weights, the binary approximation is exact
/// away from the padding ring.
inline Tensor3 random_sign_tensor(std::size_t c, std::size_t h, std::size_t w, float magnitude, std::uint64_t seed,
                                  std::uint64_t tag) {
  std::mt19937_64 rng(seed ^ (tag * 0xD1B54A32D192ED03ull));
  std::vector<float> v(c * h * w);
  for (auto& x : v) x = (rng() & 1u) ? magnitude : -magnitude;
  return Tensor3(c, h, w, std::move(v));
}

namespace detail {

// Relative agreement on the interior (at least `pad` pixels from every edge).
inline bool interior_agrees(std::span<const float> got, std::span<const float> want, std::size_t h, std::size_t w,
                            std::size_t pad, double rel_tol, double floor, std::string& why) {
  for (std::size_t y = pad; y + pad < h; ++y) {
    for (std::size_t x = pad; x + pad < w; ++x) {
      const double a = got[y * w + x];
      const double b = want[y * w + x];
      if (std::fabs(a - b) > rel_tol * std::max(std::fabs(b), floor)) {
        std::ostringstream os;
        os << "mismatch at (" << y << ", " << x << "): " << a << " vs " << b;
        why = os.str();
        return false;
      }
    }
  }
  return true;
}

}  // namespace detail

/// Pre-timing gate for one input size. Checks that single- and multi-threaded
/// runs of both implementations agree bit for bit on the benchmark data, and
/// that on constant-magnitude data the XNOR pipeline matches both the
/// full-precision and the binary-weight baselines to 1e-4 relative. Throws
/// Errc::verification_failed otherwise.
inline void oracle_gate(const BenchConfig& cfg, std::size_t size, const Tensor3& input,
                        VanillaConvolution& vanilla, XnorConvolution& xnor, unsigned mt) {
  const std::size_t pad = cfg.kernel / 2;
  const std::size_t n = vanilla.out_h() * vanilla.out_w();
  auto fail = [&](const std::string& what) {
    throw Error(Errc::verification_failed, "size " + std::to_string(size) + ": " + what);
  };

  std::vector<float> a(n), b(n);
  vanilla.run(input, a, 1);
  vanilla.run(input, b, mt);
  if (a != b) fail("vanilla-1t and vanilla-mt outputs differ");
  xnor.set_threads(1);
  xnor.run(input, a);
  xnor.set_threads(mt);
  xnor.run(input, b);
  if (a != b) fail("xnor-1t and xnor-mt outputs differ");

  constexpr float kInputMag = 0.5f;
  constexpr float kWeightMag = 0.25f;
  const Tensor3 signed_input = random_sign_tensor(cfg.channels, size, size, kInputMag, cfg.seed, size);
  const Tensor3 signed_weights =
      random_sign_tensor(cfg.channels, cfg.kernel, cfg.kernel, kWeightMag, cfg.seed, size + 1);
  const Tensor3 x_out = XnorConvolution(cfg.channels, size, size, std::span(&signed_weights, 1), pad, cfg.word_bits, mt)
                            .run(signed_input);
  const Tensor2 full = conv2d_float(signed_input, signed_weights, pad);
  const Tensor2 bwn = bwn_conv(signed_input, sign_binarize(signed_weights), pad);
  const double floor = static_cast<double>(kInputMag) * kWeightMag;
  std::string why;
  if (!detail::interior_agrees(x_out.data(), full.data(), full.height(), full.width(), pad, 1e-4, floor, why)) {
    fail("xnor vs full-precision: " + why);
  }
  if (!detail::interior_agrees(x_out.data(), bwn.data(), bwn.height(), bwn.width(), pad, 1e-4, floor, why)) {
    fail("xnor vs binary-weight: " + why);
  }
}

/// Benchmarks vanilla and XNOR convolution, single- and multi-threaded, for
/// every configured size. Buffers and plans are built before timing; the XNOR
/// timing covers padding, binarization, packing, XNOR/popcount, K and the
/// final scaling. Progress lines go to `log` when given.
inline BenchReport run_bench(const BenchConfig& cfg, std::ostream* log = nullptr) {
  validate(cfg);
  const unsigned mt = resolve_threads(cfg.threads);
  const std::size_t pad = cfg.kernel / 2;
  BenchReport report;

  for (std::size_t size : cfg.sizes) {
    const Tensor3 input = random_tensor(cfg.channels, size, size, cfg.seed, size);
    const Tensor3 weights = random_tensor(cfg.channels, cfg.kernel, cfg.kernel, cfg.seed, ~std::uint64_t{size});
    VanillaConvolution vanilla(cfg.channels, size, size, weights, pad);
    XnorConvolution xnor(cfg.channels, size, size, std::span(&weights, 1), pad, cfg.word_bits, 1);
    XnorConvolution xnor_mt(cfg.channels, size, size, std::span(&weights, 1), pad, cfg.word_bits, mt);
    const std::size_t n_out = vanilla.out_h() * vanilla.out_w();
    std::vector<std::vector<float>> out(4, std::vector<float>(n_out));

    oracle_gate(cfg, size, input, vanilla, xnor, mt);
    xnor.set_threads(1);
    if (log) *log << "size " << size << "x" << size << " (gate passed)\n";

    const auto t = time_interleaved(cfg.warmup, cfg.repeats,
                                    {[&] { vanilla.run(input, out[0], 1); }, [&] { vanilla.run(input, out[1], mt); },
                                     [&] { xnor.run(input, out[2]); }, [&] { xnor_mt.run(input, out[3]); }});
    const std::string_view impls[] = {kVanilla1, kVanillaMt, kXnor1, kXnorMt};
    for (std::size_t i = 0; i < 4; ++i) {
      report.rows.push_back({std::string(impls[i]), size, t[i].mean_ms, t[i].std_ms, 0.0});
      if (log) *log << "  " << impls[i] << " @ " << size << ": " << t[i].mean_ms << " ms\n";
    }
  }

  for (auto& row : report.rows) {
    const BenchRow* base = report.find(baseline_for(row.impl), row.size);
    row.speedup = base->mean_ms / row.mean_ms;
  }
  return report;
}

namespace detail {

inline std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

inline std::string fixed(double v, int digits) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, digits);
  return std::string(buf, end);
}

}  // namespace detail

inline constexpr std::string_view kCsvHeader = "impl,size,mean_ms,std_ms,speedup";

/// Table layout follows "size | baseline | candidate | speed-up"; csv numbers
/// use the shortest round-trip representation.
inline std::string emit_report(const BenchReport& report, Format format) {
  std::string out;
  if (format == Format::csv) {
    out += kCsvHeader;
    out += '\n';
    for (const auto& r : report.rows) {
      out += r.impl + ',' + std::to_string(r.size) + ',' + detail::shortest(r.mean_ms) + ',' +
             detail::shortest(r.std_ms) + ',' + detail::shortest(r.speedup) + '\n';
    }
    return out;
  }
  out += "| Input Size | Implementation | Baseline | Baseline (ms) | Candidate (ms) | Std (ms) | Speed-up |\n";
  out += "|------------|----------------|----------|---------------|----------------|----------|----------|\n";
  for (const auto& r : report.rows) {
    const std::string size = std::to_string(r.size) + "x" + std::to_string(r.size);
    out += "| " + size + " | " + r.impl + " | " + std::string(baseline_for(r.impl)) + " | " +
           detail::fixed(r.mean_ms * r.speedup, 3) + " | " + detail::fixed(r.mean_ms, 3) + " | " +
           detail::fixed(r.std_ms, 3) + " | " + detail::fixed(r.speedup, 2) + "× |\n";
  }
  return out;
}

namespace detail {

template <class T>
T parse_number(std::string_view field) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(Errc::invalid_argument, "bad numeric field '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace detail

inline BenchReport parse_csv_report(std::string_view text) {
  BenchReport report;
  bool header = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      if (line != kCsvHeader) throw Error(Errc::invalid_argument, "unexpected csv header");
      header = false;
      continue;
    }
    std::vector<std::string_view> f;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        f.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (f.size() != 5) throw Error(Errc::invalid_argument, "csv row needs 5 fields");
    report.rows.push_back({std::string(f[0]), detail::parse_number<std::size_t>(f[1]),
                           detail::parse_number<double>(f[2]), detail::parse_number<double>(f[3]),
                           detail::parse_number<double>(f[4])});
  }
  return report;
}

}  // namespace xnorconv::bench
