#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <vector>

#include "docstruct/graph.hpp"

namespace docstruct {

// Node -> community assignment with contiguous ids 0..C-1.
struct Partition {
  std::vector<int> assignment;

  static Partition singletons(std::size_t node_count);

  int community_count() const;
  std::vector<std::vector<int>> members() const;

  // Renumbers community ids by first appearance over ascending node id.
  void canonicalize();

  void validate(std::size_t node_count) const;

  friend bool operator==(const Partition&, const Partition&) = default;
};

struct LouvainConfig {
  std::uint64_t seed = 0;
  double resolution = 1.0;
  double min_modularity_gain = 1e-7;
  int max_passes = 16;

  void validate() const;
};

// Weighted modularity of a partition. Negative edge weights are clamped to
// 0 here and inside louvain, where the objective assumes non-negativity.
// A graph whose clamped total weight is 0 scores 0.
double modularity(const CollectionGraph& graph, const Partition& partition,
                  double resolution = 1.0);

struct LouvainResult {
  Partition partition;
  double modularity = 0.0;
  // Modularity recomputed on the input graph after each pass (local move
  // phase + aggregation); non-decreasing.
  std::vector<double> pass_modularity;
};

// Two-phase Louvain with seeded visiting order and deterministic
// tie-breaking (lowest candidate community id wins equal gains).
LouvainResult louvain(const CollectionGraph& graph, const LouvainConfig& config);

// Runs louvain `restarts` times with salted seeds and keeps the best
// modularity (first winner on ties).
LouvainResult louvain_restarts(const CollectionGraph& graph, const LouvainConfig& config,
                               int restarts);

struct BruteForceResult {
  Partition partition;
  double modularity = 0.0;
};

// Exhaustive search over all set partitions; oracle for small graphs.
// Ties resolve to the lexicographically smallest canonical assignment.
BruteForceResult brute_force_best_partition(const CollectionGraph& graph,
                                            double resolution = 1.0);

void export_partition_json(const Partition& partition, double modularity_value,
                           std::ostream& out);

struct PartitionFile {
  Partition partition;
  double modularity = 0.0;
};

PartitionFile read_partition_json(const std::filesystem::path& path);

}  // namespace docstruct
