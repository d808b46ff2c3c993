#include <benchmark/benchmark.h>

#include <vector>

#include "docstruct/communities.hpp"
#include "docstruct/embed.hpp"
#include "docstruct/graph.hpp"
#include "docstruct/synthgen.hpp"
#include "docstruct/toc.hpp"
#include "docstruct/util.hpp"

namespace {

using namespace docstruct;

std::vector<Segment> synthetic_segments(int count) {
  std::vector<Segment> segments;
  Rng rng(4242);
  for (int i = 0; i < count; ++i) {
    Segment seg;
    seg.doc_ind = i / 8;
    seg.seg_ind = static_cast<double>(i % 8) / 7.0;
    seg.head_text = "Header Number " + std::to_string(rng.below(40));
    seg.body_text = "body text with some recurring filler words number " +
                    std::to_string(rng.below(400));
    segments.push_back(std::move(seg));
  }
  return segments;
}

CollectionGraph random_weighted_graph(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::tuple<int, int, double>> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      edges.emplace_back(static_cast<int>(u), static_cast<int>(v), rng.unit());
    }
  }
  return CollectionGraph::from_edges(n, edges);
}

void BM_DeterministicEmbed(benchmark::State& state) {
  EmbeddingProviderConfig config;
  const std::string text = "Management Discussion And Analysis Of Financial Condition";
  for (auto _ : state) {
    benchmark::DoNotOptimize(deterministic_embed(text, config));
  }
}
BENCHMARK(BM_DeterministicEmbed);

void BM_BuildGraph(benchmark::State& state) {
  const auto segments = synthetic_segments(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    EmbeddingProvider provider(EmbeddingProviderConfig{});
    benchmark::DoNotOptimize(
        build_graph(segments, provider, SimilarityWeights::ordered_flexible()));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildGraph)->Arg(64)->Arg(128)->Arg(256)->Complexity(benchmark::oNSquared);

void BM_Louvain(benchmark::State& state) {
  const auto graph = random_weighted_graph(static_cast<std::size_t>(state.range(0)), 7);
  LouvainConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(louvain(graph, config));
  }
}
BENCHMARK(BM_Louvain)->Arg(64)->Arg(128)->Arg(256);

void BM_Modularity(benchmark::State& state) {
  const auto graph = random_weighted_graph(static_cast<std::size_t>(state.range(0)), 11);
  const auto result = louvain(graph, LouvainConfig{});
  for (auto _ : state) {
    benchmark::DoNotOptimize(modularity(graph, result.partition));
  }
}
BENCHMARK(BM_Modularity)->Arg(128)->Arg(256);

void BM_SelectTopics(benchmark::State& state) {
  Rng rng(33);
  const std::size_t n_nodes = 400;
  const int n_docs = 40;
  const int n_comm = 25;
  Partition partition;
  DocNodeIndex index;
  for (std::size_t node = 0; node < n_nodes; ++node) {
    partition.assignment.push_back(static_cast<int>(rng.below(n_comm)));
    index[static_cast<int>(rng.below(n_docs))].push_back(static_cast<int>(node));
  }
  partition.canonicalize();
  Corpus corpus;
  for (int d = 0; d < n_docs; ++d) {
    corpus.docs.push_back(make_document(d, "d" + std::to_string(d), ""));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_topics(partition, 8, corpus, index));
  }
}
BENCHMARK(BM_SelectTopics);

void BM_GenerateCollection(benchmark::State& state) {
  SynthSpec spec;
  spec.n_docs = 30;
  spec.seed = 5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_collection(spec));
  }
}
BENCHMARK(BM_GenerateCollection);

}  // namespace

BENCHMARK_MAIN();
