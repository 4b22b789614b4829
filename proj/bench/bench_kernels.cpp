// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "qcomb/correlation_analysis.hpp"
#include "qcomb/detector_chain.hpp"
#include "qcomb/histogram.hpp"
#include "qcomb/pair_source.hpp"

namespace {

using namespace qcomb;

source::SourceSpec bench_source(double duration) {
  source::SourceSpec s;
  s.pair_rate_per_channel = 2e6;
  s.duration = duration;
  s.rng_seed = 7;
  return s;
}

std::pair<detector::TimeTagStream, detector::TimeTagStream> bench_streams() {
  const auto events = source::generate_pairs(bench_source(1.0));
  const auto det = detector::DetectorSpec::ideal();
  auto r1 = make_substream(1, {1});
  auto r2 = make_substream(1, {2});
  return {detector::detect(source::arrivals(events, source::Arm::signal), det, 1.0, r1, 0),
          detector::detect(source::arrivals(events, source::Arm::idler), det, 1.0, r2, 1)};
}

void BM_generate_serial(benchmark::State& st) {
  const auto spec = bench_source(0.5);
  for (auto _ : st) benchmark::DoNotOptimize(source::generate_pairs_serial(spec));
}
void BM_generate_parallel(benchmark::State& st) {
  const auto spec = bench_source(0.5);
  for (auto _ : st) benchmark::DoNotOptimize(source::generate_pairs(spec));
}

void BM_histogram_serial(benchmark::State& st) {
  static const auto streams = bench_streams();
  analysis::HistogramOptions o;
  o.range = 6000;
  for (auto _ : st) benchmark::DoNotOptimize(analysis::cross_histogram_serial(streams.first, streams.second, o));
}
void BM_histogram_parallel(benchmark::State& st) {
  static const auto streams = bench_streams();
  analysis::HistogramOptions o;
  o.range = 6000;
  for (auto _ : st) benchmark::DoNotOptimize(analysis::cross_histogram(streams.first, streams.second, o));
}

void BM_heralded_serial(benchmark::State& st) {
  static const auto streams = bench_streams();
  for (auto _ : st)
    benchmark::DoNotOptimize(analysis::heralded_counts(streams.first, streams.second, streams.second, 10, 0, 0,
                                                       streams.first.tags.size()));
}
void BM_heralded_parallel(benchmark::State& st) {
  static const auto streams = bench_streams();
  for (auto _ : st)
    benchmark::DoNotOptimize(analysis::heralded_counts_parallel(streams.first, streams.second, streams.second, 10, 0));
}

}  // namespace

BENCHMARK(BM_generate_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_generate_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_histogram_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_histogram_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_heralded_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_heralded_parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
