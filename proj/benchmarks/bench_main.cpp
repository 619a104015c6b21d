#include <floweval/backends.hpp>
#include <floweval/element_set.hpp>
#include <floweval/matching.hpp>
#include <floweval/mermaid.hpp>

#include <benchmark/benchmark.h>

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::string fixture_source() {
  std::ifstream in(std::string(BENCH_DATA_DIR) + "/fixed_point.mmd", std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> random_pool(std::size_t n, std::uint64_t seed) {
  static const char* words[] = {"collect", "validate", "transform", "store",  "reject",
                                "records", "batches",  "results",   "events", "totals"};
  std::mt19937_64 rng(seed);
  std::vector<std::string> pool;
  pool.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string s = words[rng() % 10];
    s += ' ';
    s += words[rng() % 10];
    s += ' ';
    s += std::to_string(rng() % 100);
    pool.push_back(std::move(s));
  }
  return pool;
}

void BM_ParseFlowchart(benchmark::State& state) {
  const std::string source = fixture_source();
  for (auto _ : state) {
    auto graph = floweval::mermaid::parse_mermaid(source, floweval::mermaid::ParseMode::strict);
    benchmark::DoNotOptimize(graph);
  }
}
BENCHMARK(BM_ParseFlowchart);

void BM_Decompose(benchmark::State& state) {
  const auto graph =
      floweval::mermaid::parse_mermaid(fixture_source(), floweval::mermaid::ParseMode::strict);
  for (auto _ : state) {
    auto set = floweval::decompose(graph);
    benchmark::DoNotOptimize(set);
  }
}
BENCHMARK(BM_Decompose);

void BM_Similarity(benchmark::State& state) {
  const std::string a = "initialize the running total to zero";
  const std::string b = "initialise the running total to zero";
  for (auto _ : state) {
    benchmark::DoNotOptimize(floweval::matching::similarity(a, b));
  }
}
BENCHMARK(BM_Similarity);

void BM_Intersect(benchmark::State& state) {
  const auto left = random_pool(static_cast<std::size_t>(state.range(0)), 1);
  const auto right = random_pool(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) {
    auto result = floweval::matching::intersect(left, right);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_Intersect)->Arg(20)->Arg(60);

void BM_PlanBatches(benchmark::State& state) {
  for (auto _ : state) {
    auto plan = floweval::backends::plan_batches(static_cast<std::size_t>(state.range(0)), 10,
                                                 static_cast<std::size_t>(state.range(0)));
    benchmark::DoNotOptimize(plan);
  }
}
BENCHMARK(BM_PlanBatches)->Arg(19)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
