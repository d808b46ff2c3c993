#pragma once

#include <optional>
#include <ostream>
#include <tuple>
#include <vector>

#include "docstruct/embed.hpp"
#include "docstruct/headers.hpp"

namespace docstruct {

// Ceiling for the reciprocal positional similarity. Every pair receives a
// positional term of at least lambda_pos (reciprocal gaps never fall below
// 1), so the cap bounds how far position can outvote the cosine terms. Caps
// much above this default let that dense positional background dominate
// modularity, and community detection collapses into position bands instead
// of topics. Configurable per corpus.
inline constexpr double kDefaultPosCap = 1.5;

// Mixing weights for the three pairwise similarity terms. Non-negative and
// summing to 1.
struct SimilarityWeights {
  double head = 0.5;
  double body = 0.25;
  double pos = 0.25;

  void validate() const;

  // Named profiles for corpora with increasingly loose structure.
  static SimilarityWeights strict() { return {0.7, 0.0, 0.3}; }
  static SimilarityWeights flexible() { return {0.5, 0.3, 0.2}; }
  static SimilarityWeights ordered_flexible() { return {0.5, 0.25, 0.25}; }
};

// Segment plus its graph identity and embeddings. body_vec is only present
// when the body term carries weight.
struct SegmentNode {
  int node_id = 0;
  int doc_ind = 0;
  double seg_ind = 0.0;
  std::string head_text;
  std::string body_text;
  Span head_span;
  Span body_span;
  EmbeddingVector head_vec;
  std::optional<EmbeddingVector> body_vec;
};

// Reciprocal distance between normalized positions, capped so that equal
// positions stay finite. Larger means closer.
double pos_sim(double seg_ind_a, double seg_ind_b, double pos_cap);

double edge_weight(const SegmentNode& a, const SegmentNode& b,
                   const SimilarityWeights& lambdas, double pos_cap);

// Complete undirected weighted graph over all segments. Optionally
// sparsified to each node's top-m heaviest edges (symmetrized by union);
// missing pairs then weigh 0.
class CollectionGraph {
 public:
  static CollectionGraph from_edges(std::size_t node_count,
                                    const std::vector<std::tuple<int, int, double>>& edges);

  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<SegmentNode>& nodes() const { return nodes_; }
  const SegmentNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }

  bool sparsified() const { return sparse_; }
  const SimilarityWeights& lambdas() const { return lambdas_; }
  double pos_cap() const { return pos_cap_; }

  double weight(int u, int v) const;

  // Number of stored pairs: n(n-1)/2 when dense.
  std::size_t edge_count() const;

  // Visits each stored pair once with u < v.
  template <typename F>
  void for_each_edge(F&& fn) const {
    const int n = static_cast<int>(nodes_.size());
    if (!sparse_) {
      for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
          fn(u, v, dense_[dense_index(u, v)]);
        }
      }
    } else {
      for (int u = 0; u < n; ++u) {
        for (const auto& [v, w] : adjacency_[static_cast<std::size_t>(u)]) {
          if (u < v) {
            fn(u, v, w);
          }
        }
      }
    }
  }

  friend CollectionGraph build_graph(const std::vector<Segment>& segments,
                                     EmbeddingProvider& provider,
                                     const SimilarityWeights& lambdas, double pos_cap,
                                     std::optional<std::size_t> sparsify_top_m);

 private:
  std::size_t dense_index(int u, int v) const;

  std::vector<SegmentNode> nodes_;
  SimilarityWeights lambdas_;
  double pos_cap_ = kDefaultPosCap;
  bool sparse_ = false;
  std::vector<double> dense_;  // upper triangle, row-major
  std::vector<std::vector<std::pair<int, double>>> adjacency_;  // sparse only
};

// Embeds header (and, when weighted, body) texts and materializes all
// pairwise weights. Deterministic given its inputs.
CollectionGraph build_graph(const std::vector<Segment>& segments, EmbeddingProvider& provider,
                            const SimilarityWeights& lambdas, double pos_cap = kDefaultPosCap,
                            std::optional<std::size_t> sparsify_top_m = std::nullopt);

// "u TAB v TAB weight" with 9 significant digits, one edge per line.
void export_edges_tsv(const CollectionGraph& graph, std::ostream& out);

// One JSON object per node with the segment tuple fields.
void export_nodes_jsonl(const CollectionGraph& graph, std::ostream& out);

}  // namespace docstruct
