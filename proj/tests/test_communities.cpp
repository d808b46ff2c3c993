#include <doctest.h>

#include <fstream>
#include <numeric>

#include "docstruct/communities.hpp"
#include "docstruct/errors.hpp"
#include "test_support.hpp"

using namespace docstruct;

namespace {

// Two k-cliques with unit intra weights joined by one bridge edge.
CollectionGraph two_cliques(int k, double bridge) {
  std::vector<std::tuple<int, int, double>> edges;
  for (int u = 0; u < k; ++u) {
    for (int v = u + 1; v < k; ++v) {
      edges.emplace_back(u, v, 1.0);
      edges.emplace_back(k + u, k + v, 1.0);
    }
  }
  if (bridge > 0.0) {
    edges.emplace_back(0, k, bridge);
  }
  return CollectionGraph::from_edges(static_cast<std::size_t>(2 * k), edges);
}

Partition partition_of(std::vector<int> assignment) {
  Partition p;
  p.assignment = std::move(assignment);
  return p;
}

}  // namespace

TEST_CASE("modularity of the all-in-one partition is zero") {
  Rng rng(5);
  const auto graph = testsupport::random_graph(rng, 7, 0.1, 2.0);
  CHECK(modularity(graph, partition_of(std::vector<int>(7, 0))) ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("modularity of two separated cliques is one half") {
  const auto graph = two_cliques(3, 0.0);
  CHECK(modularity(graph, partition_of({0, 0, 0, 1, 1, 1})) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("splitting a single edge into singletons scores -1/2") {
  const auto graph = CollectionGraph::from_edges(2, {{0, 1, 1.0}});
  CHECK(modularity(graph, partition_of({0, 1})) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(modularity(graph, partition_of({0, 0})) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("negative weights are clamped inside modularity") {
  const auto mixed =
      CollectionGraph::from_edges(3, {{0, 1, 1.0}, {1, 2, -5.0}, {0, 2, -1.0}});
  const auto clamped = CollectionGraph::from_edges(3, {{0, 1, 1.0}});
  const auto partition = partition_of({0, 0, 1});
  CHECK(modularity(mixed, partition) == modularity(clamped, partition));
}

TEST_CASE("modularity validates the partition") {
  const auto graph = CollectionGraph::from_edges(2, {{0, 1, 1.0}});
  CHECK_THROWS_AS(modularity(graph, partition_of({0})), PartitionError);
  CHECK_THROWS_AS(modularity(graph, partition_of({0, 2})), PartitionError);
}

TEST_CASE("louvain finds the planted cliques") {
  const auto graph = two_cliques(4, 0.01);
  const auto result = louvain(graph, LouvainConfig{});
  CHECK(result.partition.community_count() == 2);
  for (int u = 1; u < 4; ++u) {
    CHECK(result.partition.assignment[static_cast<std::size_t>(u)] ==
          result.partition.assignment[0]);
    CHECK(result.partition.assignment[static_cast<std::size_t>(4 + u)] ==
          result.partition.assignment[4]);
  }
  CHECK(result.partition.assignment[0] != result.partition.assignment[4]);
}

TEST_CASE("louvain merges a lone edge") {
  const auto graph = CollectionGraph::from_edges(2, {{0, 1, 1.0}});
  const auto result = louvain(graph, LouvainConfig{});
  CHECK(result.partition.community_count() == 1);
  CHECK(result.modularity == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("louvain is deterministic for a fixed seed") {
  Rng rng(17);
  const auto graph = testsupport::random_graph(rng, 20, 0.0, 1.0);
  LouvainConfig config;
  config.seed = 99;
  const auto first = louvain(graph, config);
  const auto second = louvain(graph, config);
  CHECK(first.partition == second.partition);
  CHECK(first.modularity == second.modularity);
}

TEST_CASE("louvain rejects graphs below two nodes") {
  const auto graph = CollectionGraph::from_edges(1, {});
  CHECK_THROWS_AS(louvain(graph, LouvainConfig{}), GraphTooSmallError);
}

TEST_CASE("reported modularity matches an independent recomputation") {
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 4 + rng.below(10);
    const auto graph = testsupport::random_graph(rng, n, -0.2, 1.0);
    LouvainConfig config;
    config.seed = trial;
    const auto result = louvain(graph, config);
    CHECK(result.modularity ==
          doctest::Approx(modularity(graph, result.partition)).epsilon(1e-9));
  }
}

TEST_CASE("modularity never decreases across passes") {
  Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const auto graph = testsupport::random_graph(rng, 16, 0.0, 1.0);
    LouvainConfig config;
    config.seed = trial;
    const auto result = louvain(graph, config);
    for (std::size_t i = 1; i < result.pass_modularity.size(); ++i) {
      CHECK(result.pass_modularity[i] >= result.pass_modularity[i - 1] - 1e-9);
    }
  }
}

TEST_CASE("modularity is invariant under node relabeling") {
  Rng rng(57);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 8;
    const auto graph = testsupport::random_graph(rng, n, 0.0, 1.0);
    const auto result = louvain(graph, LouvainConfig{});

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);

    std::vector<std::tuple<int, int, double>> permuted_edges;
    graph.for_each_edge([&](int u, int v, double w) {
      permuted_edges.emplace_back(perm[static_cast<std::size_t>(u)],
                                  perm[static_cast<std::size_t>(v)], w);
    });
    const auto permuted = CollectionGraph::from_edges(n, permuted_edges);

    Partition relabeled;
    relabeled.assignment.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      relabeled.assignment[static_cast<std::size_t>(perm[i])] = result.partition.assignment[i];
    }
    relabeled.canonicalize();
    CHECK(modularity(permuted, relabeled) ==
          doctest::Approx(modularity(graph, result.partition)).epsilon(1e-12));
  }
}

TEST_CASE("brute force agrees with hand-checked optima") {
  {
    const auto graph = CollectionGraph::from_edges(2, {{0, 1, 1.0}});
    const auto best = brute_force_best_partition(graph);
    CHECK(best.partition.assignment == std::vector<int>{0, 0});
    CHECK(best.modularity == doctest::Approx(0.0).epsilon(1e-12));
  }
  {
    // two disconnected unit edges
    const auto graph = CollectionGraph::from_edges(4, {{0, 1, 1.0}, {2, 3, 1.0}});
    const auto best = brute_force_best_partition(graph);
    CHECK(best.partition.assignment == std::vector<int>{0, 0, 1, 1});
    CHECK(best.modularity == doctest::Approx(0.5).epsilon(1e-12));
  }
  {
    const auto graph = CollectionGraph::from_edges(1, {});
    const auto best = brute_force_best_partition(graph);
    CHECK(best.partition.assignment == std::vector<int>{0});
  }
}

TEST_CASE("brute force refuses large graphs") {
  Rng rng(9);
  const auto graph = testsupport::random_graph(rng, 11, 0.0, 1.0);
  CHECK_THROWS_AS(brute_force_best_partition(graph), OracleTooLargeError);
}

TEST_CASE("louvain stays near the brute-force optimum on small graphs") {
  Rng rng(71);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + rng.below(6);
    const auto graph = testsupport::random_graph(rng, n, 0.0, 1.0);
    LouvainConfig config;
    config.seed = trial;
    const auto approx = louvain(graph, config);
    const auto exact = brute_force_best_partition(graph);
    CHECK(approx.modularity >= exact.modularity - 0.05);
    CHECK(approx.modularity <= exact.modularity + 1e-9);
  }
}

TEST_CASE("partition files round-trip") {
  Rng rng(101);
  const auto graph = testsupport::random_graph(rng, 12, 0.0, 1.0);
  const auto result = louvain(graph, LouvainConfig{});

  testsupport::TempDir tmp("partition");
  {
    std::ofstream out(tmp.path() / "partition.json");
    export_partition_json(result.partition, result.modularity, out);
  }
  const PartitionFile reread = read_partition_json(tmp.path() / "partition.json");
  CHECK(reread.partition == result.partition);
  CHECK(reread.modularity == result.modularity);
}

TEST_CASE("restarts keep the best modularity") {
  Rng rng(83);
  const auto graph = testsupport::random_graph(rng, 14, 0.0, 1.0);
  LouvainConfig config;
  config.seed = 5;
  const auto single = louvain(graph, config);
  const auto multi = louvain_restarts(graph, config, 4);
  CHECK(multi.modularity >= single.modularity - 1e-12);
}
