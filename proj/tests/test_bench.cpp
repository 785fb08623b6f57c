#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "crisiskit/bench.hpp"

using namespace crisiskit;

namespace {

BenchConfig quick_config() {
  BenchConfig cfg;
  cfg.batch_size = 4;
  cfg.iterations = 3;
  cfg.warmup = 1;
  cfg.input_length = 8;
  return cfg;
}

}  // namespace

TEST_CASE("throughput times seconds-per-batch equals the batch size") {
  Rng rng(1);
  auto model = EncoderModel<float>::init(desk_shape("s_t", 512, 8), rng);
  auto report = run_benchmark(model, quick_config(), "s_t");
  CHECK(report.seconds_per_batch > 0);
  CHECK(report.throughput > 0);
  CHECK(report.throughput * report.seconds_per_batch ==
        Catch::Approx(double(report.config.batch_size)).epsilon(1e-12));
}

TEST_CASE("speedup against itself is exactly one") {
  Rng rng(2);
  auto model = EncoderModel<float>::init(desk_shape("s_t", 512, 8), rng);
  auto report = run_benchmark(model, quick_config(), "self");
  CHECK(speedup_vs_baseline(report, report) == 1.0);
  CHECK(format_speedup(speedup_vs_baseline(report, report)) == "x1.0");
}

TEST_CASE("speedup formatting uses one decimal") {
  CHECK(format_speedup(3699.0 / 1050.0) == "x3.5");
  CHECK(format_speedup(19549.0 / 1050.0) == "x18.6");
  CHECK(format_speedup(8160.0 / 1050.0) == "x7.8");
}

TEST_CASE("mismatched configurations refuse to compare") {
  Rng rng(3);
  auto model = EncoderModel<float>::init(desk_shape("s_t", 512, 16), rng);
  auto a = run_benchmark(model, quick_config(), "a");
  BenchConfig other = quick_config();
  other.batch_size = 8;
  auto b = run_benchmark(model, other, "b");
  CHECK_THROWS_AS(speedup_vs_baseline(a, b), std::invalid_argument);
}

TEST_CASE("bench report serializes and tabulates") {
  Rng rng(4);
  auto model = EncoderModel<float>::init(desk_shape("s_t", 512, 8), rng);
  auto report = run_benchmark(model, quick_config(), "s_t");
  auto j = to_json(report);
  CHECK(j.at("model") == "s_t");
  CHECK(j.at("batch_size") == 4);
  CHECK(j.at("throughput_samples_per_sec").get<double>() > 0);

  auto table = bench_table({report, report}, &report);
  CHECK(table.find("s_t") != std::string::npos);
  CHECK(table.find("x1.0") != std::string::npos);
}

TEST_CASE("multi-reader aggregate throughput is positive") {
  Rng rng(5);
  auto model = EncoderModel<float>::init(desk_shape("s_t", 512, 8), rng);
  BenchConfig cfg = quick_config();
  const double agg = aggregate_throughput(model, cfg, 2);
  CHECK(agg > 0);
}
