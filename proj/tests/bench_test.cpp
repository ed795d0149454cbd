#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"

using namespace xnorconv;
using namespace xnorconv::bench;

TEST(Bench, SmokeShape) {
  BenchConfig cfg;
  cfg.sizes = {256};
  cfg.repeats = 3;
  cfg.warmup = 1;
  const auto report = run_bench(cfg);
  ASSERT_EQ(report.rows.size(), 4u);
  for (const auto& r : report.rows) {
    EXPECT_EQ(r.size, 256u);
    EXPECT_GT(r.mean_ms, 0.0);
    const auto* base = report.find(baseline_for(r.impl), r.size);
    ASSERT_NE(base, nullptr);
    EXPECT_EQ(r.speedup, base->mean_ms / r.mean_ms);
  }
  for (auto impl : {kVanilla1, kVanillaMt, kXnor1, kXnorMt}) EXPECT_NE(report.find(impl, 256), nullptr);
}

TEST(Bench, ConfigValidation) {
  BenchConfig cfg;
  cfg.repeats = 0;
  EXPECT_THROW(validate(cfg), Error);
  cfg = {};
  cfg.sizes.clear();
  EXPECT_THROW(validate(cfg), Error);
  cfg = {};
  cfg.kernel = 4;
  EXPECT_THROW(validate(cfg), Error);
  cfg = {};
  cfg.word_bits = 16;
  EXPECT_THROW(validate(cfg), Error);
}

TEST(EmitReport, EmptyIsHeaderOnly) {
  EXPECT_EQ(emit_report({}, Format::csv), std::string(kCsvHeader) + "\n");
  const std::string table = emit_report({}, Format::table);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 2);
  EXPECT_NE(table.find("Speed-up"), std::string::npos);
}

TEST(EmitReport, OneRowTable) {
  BenchReport r{{{"xnor-mt", 2048, 21.0, 0.5, 2.5678}}};
  const std::string table = emit_report(r, Format::table);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 3);
  EXPECT_NE(table.find("| 2.57× |"), std::string::npos) << table;
}

TEST(EmitReport, CsvRoundTripIsExact) {
  BenchReport r{{{"vanilla-1t", 256, 1.0 / 3.0, 0.1 + 0.2, 1.0},
                 {"xnor-1t", 256, 0.0123456789012345, 1e-17, 27.000000000000004}}};
  const auto back = parse_csv_report(emit_report(r, Format::csv));
  EXPECT_EQ(back.rows, r.rows);
}

TEST(EmitReport, SpeedupsRecomputableFromCsv) {
  BenchConfig cfg;
  cfg.sizes = {64, 128};
  cfg.repeats = 2;
  cfg.warmup = 0;
  const auto back = parse_csv_report(emit_report(run_bench(cfg), Format::csv));
  ASSERT_EQ(back.rows.size(), 8u);
  for (const auto& row : back.rows) {
    EXPECT_EQ(row.speedup, back.find(baseline_for(row.impl), row.size)->mean_ms / row.mean_ms);
  }
}

TEST(EmitReport, MalformedCsvThrows) {
  EXPECT_THROW(parse_csv_report("nope\n"), Error);
  EXPECT_THROW(parse_csv_report(std::string(kCsvHeader) + "\nxnor-1t,12,abc,1,1\n"), Error);
}

TEST(Bench, SameSeedSameInputs) {
  EXPECT_EQ(random_tensor(1, 16, 16, 9, 1), random_tensor(1, 16, 16, 9, 1));
  EXPECT_FALSE(random_tensor(1, 16, 16, 9, 1) == random_tensor(1, 16, 16, 10, 1));
}
