#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "crisiskit/encoder.hpp"

namespace crisiskit {

struct BenchConfig {
  int batch_size = 32;
  int iterations = 1000;
  int warmup = 10;
  int input_length = 64;

  void validate() const {
    num::check(batch_size >= 1, "batch size must be >= 1");
    num::check(iterations >= 1, "iterations must be >= 1");
    num::check(warmup >= 0, "warmup must be >= 0");
    num::check(input_length >= 1, "input length must be >= 1");
  }

  bool operator==(const BenchConfig&) const = default;
};

struct BenchReport {
  std::string model_tag;
  BenchConfig config;
  double seconds_per_batch = 0;  // mean over timed iterations
  double throughput = 0;         // batch_size / seconds_per_batch
  std::string environment;
};

namespace benchdetail {

/// Fixed synthetic batch: deterministic token ids, full attention.
inline TokenBatch synthetic_batch(const EncoderConfig& cfg, const BenchConfig& bench) {
  Rng rng(0x42);
  TokenBatch b;
  b.batch = bench.batch_size;
  b.seq = bench.input_length;
  b.ids.resize(size_t(b.batch) * b.seq);
  b.mask.assign(size_t(b.batch) * b.seq, 1);
  for (size_t i = 0; i < b.ids.size(); ++i)
    b.ids[i] = int(rng.next_below(std::uint64_t(cfg.vocab_size)));
  return b;
}

inline std::string environment_note() {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "cpu single-thread, %zu-bit, compiler %s",
                sizeof(void*) * 8, __VERSION__);
  return buf;
}

}  // namespace benchdetail

/// Times the forward pass only (no tokenization), single stream, warm-up
/// iterations excluded, monotonic clock.
template <class Real>
BenchReport run_benchmark(const EncoderModel<Real>& model, const BenchConfig& cfg,
                          const std::string& tag) {
  cfg.validate();
  num::check(cfg.input_length <= model.cfg.max_positions,
             "input length exceeds model positions");
  model.set_trainable(false);  // frozen: forward builds no gradient graph
  const TokenBatch batch = benchdetail::synthetic_batch(model.cfg, cfg);

  for (int i = 0; i < cfg.warmup; ++i) model.forward(batch);

  using Clock = std::chrono::steady_clock;
  double total = 0;
  for (int i = 0; i < cfg.iterations; ++i) {
    const auto t0 = Clock::now();
    auto out = model.forward(batch);
    const auto t1 = Clock::now();
    total += std::chrono::duration<double>(t1 - t0).count();
    num::check(!out->value.data.empty(), "empty forward output");
  }

  BenchReport rep;
  rep.model_tag = tag;
  rep.config = cfg;
  rep.seconds_per_batch = total / double(cfg.iterations);
  rep.throughput = double(cfg.batch_size) / rep.seconds_per_batch;
  rep.environment = benchdetail::environment_note();
  return rep;
}

/// Optional multi-reader mode: aggregate throughput with `threads`
/// concurrent streams over the frozen model. Reported separately because
/// per-batch latency is only meaningful single-stream.
template <class Real>
double aggregate_throughput(const EncoderModel<Real>& model, const BenchConfig& cfg,
                            int threads) {
  cfg.validate();
  num::check(threads >= 1, "threads must be >= 1");
  model.set_trainable(false);
  const TokenBatch batch = benchdetail::synthetic_batch(model.cfg, cfg);
  for (int i = 0; i < cfg.warmup; ++i) model.forward(batch);

  std::atomic<std::int64_t> batches_done{0};
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = 0; i < cfg.iterations; ++i) {
        model.forward(batch);
        batches_done.fetch_add(1, std::memory_order_relaxed);
      }
    });
  }
  for (auto& th : pool) th.join();
  const auto t1 = std::chrono::steady_clock::now();
  const double secs = std::chrono::duration<double>(t1 - t0).count();
  return double(batches_done.load()) * cfg.batch_size / secs;
}

/// Throughput improvement factor; both reports must share one BenchConfig.
inline double speedup_vs_baseline(const BenchReport& report, const BenchReport& baseline) {
  if (!(report.config == baseline.config))
    throw std::invalid_argument("bench configs differ between report and baseline");
  return report.throughput / baseline.throughput;
}

/// "x3.5" style display, one decimal.
inline std::string format_speedup(double factor) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "x%.1f", factor);
  return buf;
}

inline nlohmann::json to_json(const BenchReport& r) {
  return {{"model", r.model_tag},
          {"batch_size", r.config.batch_size},
          {"iterations", r.config.iterations},
          {"warmup", r.config.warmup},
          {"input_length", r.config.input_length},
          {"seconds_per_batch", r.seconds_per_batch},
          {"throughput_samples_per_sec", r.throughput},
          {"environment", r.environment}};
}

/// Aligned text table with an optional baseline column.
inline std::string bench_table(const std::vector<BenchReport>& reports,
                               const BenchReport* baseline) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-16s %12s %12s %10s\n", "model", "batch_s",
                "samples/s", "speedup");
  out += line;
  for (const auto& r : reports) {
    std::string speed = "-";
    if (baseline) speed = format_speedup(speedup_vs_baseline(r, *baseline));
    std::snprintf(line, sizeof(line), "%-16s %12.6f %12.1f %10s\n", r.model_tag.c_str(),
                  r.seconds_per_batch, r.throughput, speed.c_str());
    out += line;
  }
  return out;
}

}  // namespace crisiskit
