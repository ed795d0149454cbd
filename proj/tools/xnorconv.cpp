// Command-line front end: benchmark, single convolution on fixture files, and
// the oracle-equivalence check.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xnorconv/xnorconv.hpp"

namespace {

unsigned parse_threads(const std::string& s) {
  if (s == "all") return 0;
  const unsigned long v = std::stoul(s);
  if (v == 0) throw CLI::ValidationError("--threads", "must be >= 1 or 'all'");
  return static_cast<unsigned>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bit-packed XNOR convolution: benchmark, convolve, verify"};
  app.require_subcommand(1);

  xnorconv::bench::BenchConfig cfg;
  std::string bench_threads = "all";
  std::string format = "table";
  auto* bench = app.add_subcommand("bench", "Time vanilla vs XNOR convolution");
  bench->add_option("--sizes", cfg.sizes, "Square input sizes")->delimiter(',')->capture_default_str();
  bench->add_option("--kernel", cfg.kernel, "Kernel size (odd)")->capture_default_str();
  bench->add_option("--channels", cfg.channels, "Input channels")->capture_default_str();
  bench->add_option("--repeats", cfg.repeats, "Timed runs per measurement")->capture_default_str();
  bench->add_option("--warmup", cfg.warmup, "Untimed runs before timing")->capture_default_str();
  bench->add_option("--threads", bench_threads, "Worker threads for the -mt variants, or 'all'")
      ->capture_default_str();
  bench->add_option("--word-bits", cfg.word_bits, "Tile word size")->check(CLI::IsMember({32, 64}))
      ->capture_default_str();
  bench->add_option("--seed", cfg.seed, "Input generator seed")->capture_default_str();
  bench->add_option("--format", format, "Report format")->check(CLI::IsMember({"table", "csv"}))
      ->capture_default_str();
  bool quiet = false;
  bench->add_flag("--quiet", quiet, "Suppress progress on stderr");

  std::string conv_input;
  std::vector<std::string> conv_weights;
  std::string conv_output;
  int conv_word_bits = 64;
  std::string conv_threads = "1";
  long conv_pad = -1;
  auto* conv = app.add_subcommand("conv", "Apply one XNOR convolution to a tensor fixture");
  conv->add_option("--input", conv_input, "Input tensor file (c x h x w)")->required()->check(CLI::ExistingFile);
  conv->add_option("--weights", conv_weights, "Filter tensor file (c x k x k); repeat for more output channels")
      ->required()
      ->check(CLI::ExistingFile);
  conv->add_option("--output", conv_output, "Output tensor file (filters x out_h x out_w)")->required();
  conv->add_option("--word-bits", conv_word_bits, "Tile word size")->check(CLI::IsMember({32, 64}))
      ->capture_default_str();
  conv->add_option("--threads", conv_threads, "Worker threads, or 'all'")->capture_default_str();
  conv->add_option("--pad", conv_pad, "Zero padding (default: kernel_h / 2)");

  std::size_t verify_instances = 1000;
  std::uint64_t verify_seed = 1;
  auto* verify = app.add_subcommand("verify", "Check the XNOR engine against the reference oracles");
  verify->add_option("--instances", verify_instances, "Random instances")->capture_default_str();
  verify->add_option("--seed", verify_seed, "Instance generator seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bench) {
      cfg.threads = parse_threads(bench_threads);
      cfg.format = format == "csv" ? xnorconv::bench::Format::csv : xnorconv::bench::Format::table;
      const auto report = xnorconv::bench::run_bench(cfg, quiet ? nullptr : &std::cerr);
      std::cout << xnorconv::bench::emit_report(report, cfg.format);
    } else if (*conv) {
      const xnorconv::Tensor3 input = xnorconv::load_tensor(conv_input);
      std::vector<xnorconv::Tensor3> filters;
      for (const auto& path : conv_weights) filters.push_back(xnorconv::load_tensor(path));
      const std::size_t pad = conv_pad >= 0 ? static_cast<std::size_t>(conv_pad) : filters.front().height() / 2;
      xnorconv::XnorConvolution plan(input.channels(), input.height(), input.width(), filters, pad, conv_word_bits,
                                     parse_threads(conv_threads));
      xnorconv::save_tensor(plan.run(input), conv_output);
      std::cerr << "wrote " << filters.size() << "x" << plan.out_h() << "x" << plan.out_w() << " to " << conv_output
                << "\n";
    } else if (*verify) {
      const auto summary = xnorconv::run_verification(verify_seed, verify_instances);
      std::cout << summary.instances << " instances, " << summary.failures << " mismatches\n";
      if (!summary.ok()) {
        std::cout << "first mismatch: " << summary.first_failure << "\n";
        return 1;
      }
    }
  } catch (const xnorconv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
