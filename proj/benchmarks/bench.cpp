#include <benchmark/benchmark.h>

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "nodality/centrality.hpp"
#include "nodality/graph.hpp"
#include "nodality/influence.hpp"
#include "nodality/nodality.hpp"
#include "nodality/rng.hpp"

namespace {

using namespace nodality;

/// Random weighted digraph with roughly `degree` out-edges per node.
DiscourseGraph random_graph(std::size_t n, double degree, std::uint64_t seed) {
  Rng rng(seed);
  std::map<std::pair<std::string, std::string>, std::int64_t> weights;
  auto name = [](std::size_t i) { return "a" + std::to_string(i); };
  std::size_t edges = static_cast<std::size_t>(degree * static_cast<double>(n));
  for (std::size_t e = 0; e < edges; ++e) {
    std::size_t src = rng.uniform_index(n);
    std::size_t dst = rng.uniform_index(n);
    if (src == dst) continue;
    weights[{name(src), name(dst)}] += 1 + static_cast<std::int64_t>(rng.uniform_index(4));
  }
  std::vector<std::tuple<std::string, std::string, std::int64_t>> list;
  for (const auto& [key, weight] : weights) list.emplace_back(key.first, key.second, weight);
  return DiscourseGraph(list, GraphKind::topic, "bench", TimeWindow{0, kSecondsPerDay});
}

FollowerMap bench_followers(const DiscourseGraph& graph, std::uint64_t seed) {
  Rng rng(seed);
  FollowerMap out;
  for (const std::string& actor : graph.nodes())
    out[actor] = 100 + static_cast<std::int64_t>(rng.uniform_index(100000));
  return out;
}

void BM_Betweenness(benchmark::State& state) {
  DiscourseGraph graph = random_graph(static_cast<std::size_t>(state.range(0)), 6.0, 7);
  for (auto _ : state) {
    MetricVector v = compute(graph, MetricKind::betweenness);
    benchmark::DoNotOptimize(v.values);
  }
}
BENCHMARK(BM_Betweenness)->Arg(100)->Arg(300);

void BM_Eigenvector(benchmark::State& state) {
  DiscourseGraph graph = random_graph(static_cast<std::size_t>(state.range(0)), 6.0, 11);
  for (auto _ : state) {
    MetricVector v = compute(graph, MetricKind::eigenvector);
    benchmark::DoNotOptimize(v.values);
  }
}
BENCHMARK(BM_Eigenvector)->Arg(100)->Arg(1000);

void BM_MetricMatrix(benchmark::State& state) {
  DiscourseGraph topic = random_graph(static_cast<std::size_t>(state.range(0)), 6.0, 13);
  DiscourseGraph null_side = random_graph(static_cast<std::size_t>(state.range(0)), 6.0, 17);
  FollowerMap followers = bench_followers(topic, 19);
  for (const auto& [actor, count] : bench_followers(null_side, 23))
    followers.emplace(actor, count);
  std::vector<MetricKind> kinds(kAllMetrics.begin(), kAllMetrics.end());
  for (auto _ : state) {
    NodalityMatrix m = metric_matrix(topic, null_side, kinds, followers);
    benchmark::DoNotOptimize(m.values);
  }
}
BENCHMARK(BM_MetricMatrix)->Arg(100)->Arg(300);

Eigen::MatrixXd random_matrix(std::size_t n, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd values(n, cols);
  for (Eigen::Index r = 0; r < values.rows(); ++r)
    for (Eigen::Index c = 0; c < values.cols(); ++c) values(r, c) = rng.normal(0.0, 1.0);
  return values;
}

void BM_Pca(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  Eigen::MatrixXd values = random_matrix(n, 16, 29);
  std::vector<std::string> actors;
  for (std::size_t i = 0; i < n; ++i) actors.push_back("a" + std::to_string(i));
  for (auto _ : state) {
    PcaResult result = pca(values, actors, 8);
    benchmark::DoNotOptimize(result.coordinates);
  }
}
BENCHMARK(BM_Pca)->Arg(500)->Arg(5000);

void BM_Cluster(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  Eigen::MatrixXd values = random_matrix(n, 8, 31);
  std::vector<std::string> actors;
  for (std::size_t i = 0; i < n; ++i) actors.push_back("a" + std::to_string(i));
  PcaResult result = pca(values, actors, 4);
  for (auto _ : state) {
    TierAssignment tiers = cluster(result);
    benchmark::DoNotOptimize(tiers.wcss);
  }
}
BENCHMARK(BM_Cluster)->Arg(500)->Arg(2000);

void BM_TransferEntropy(benchmark::State& state) {
  Rng rng(37);
  std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<int> x;
  std::vector<int> y;
  for (std::size_t i = 0; i < n; ++i) {
    x.push_back(static_cast<int>(rng.uniform_index(2)));
    y.push_back(static_cast<int>(rng.uniform_index(2)));
  }
  for (auto _ : state) {
    double te = transfer_entropy_symbols(x, y, 1);
    benchmark::DoNotOptimize(te);
  }
}
BENCHMARK(BM_TransferEntropy)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
