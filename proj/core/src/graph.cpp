#include "docstruct/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "docstruct/errors.hpp"
#include "docstruct/util.hpp"

namespace docstruct {

void SimilarityWeights::validate() const {
  if (head < 0.0 || body < 0.0 || pos < 0.0) {
    throw ConfigError("similarity weights must be non-negative");
  }
  if (std::abs(head + body + pos - 1.0) > 1e-9) {
    throw ConfigError("similarity weights must sum to 1, got " +
                      std::to_string(head + body + pos));
  }
}

double pos_sim(double seg_ind_a, double seg_ind_b, double pos_cap) {
  const double delta = std::abs(seg_ind_a - seg_ind_b);
  if (delta == 0.0) {
    return pos_cap;
  }
  return std::min(1.0 / delta, pos_cap);
}

double edge_weight(const SegmentNode& a, const SegmentNode& b,
                   const SimilarityWeights& lambdas, double pos_cap) {
  double weight = 0.0;
  if (lambdas.head > 0.0) {
    weight += lambdas.head * cosine(a.head_vec, b.head_vec);
  }
  if (lambdas.body > 0.0) {
    if (!a.body_vec || !b.body_vec) {
      throw DimensionError("body similarity requested but body vectors are missing");
    }
    weight += lambdas.body * cosine(*a.body_vec, *b.body_vec);
  }
  if (lambdas.pos > 0.0) {
    weight += lambdas.pos * pos_sim(a.seg_ind, b.seg_ind, pos_cap);
  }
  return weight;
}

std::size_t CollectionGraph::dense_index(int u, int v) const {
  const auto n = nodes_.size();
  const auto a = static_cast<std::size_t>(std::min(u, v));
  const auto b = static_cast<std::size_t>(std::max(u, v));
  return a * (2 * n - a - 1) / 2 + (b - a - 1);
}

double CollectionGraph::weight(int u, int v) const {
  const int n = static_cast<int>(nodes_.size());
  if (u < 0 || v < 0 || u >= n || v >= n) {
    throw PartitionError("node id out of range");
  }
  if (u == v) {
    throw PartitionError("self weight is undefined");
  }
  if (!sparse_) {
    return dense_[dense_index(u, v)];
  }
  const auto& row = adjacency_[static_cast<std::size_t>(u)];
  const auto it = std::lower_bound(
      row.begin(), row.end(), v,
      [](const std::pair<int, double>& entry, int key) { return entry.first < key; });
  if (it != row.end() && it->first == v) {
    return it->second;
  }
  return 0.0;
}

std::size_t CollectionGraph::edge_count() const {
  if (!sparse_) {
    const auto n = nodes_.size();
    return n * (n - 1) / 2;
  }
  std::size_t count = 0;
  for (const auto& row : adjacency_) {
    count += row.size();
  }
  return count / 2;
}

CollectionGraph CollectionGraph::from_edges(
    std::size_t node_count, const std::vector<std::tuple<int, int, double>>& edges) {
  CollectionGraph graph;
  graph.nodes_.resize(node_count);
  for (std::size_t i = 0; i < node_count; ++i) {
    graph.nodes_[i].node_id = static_cast<int>(i);
  }
  graph.dense_.assign(node_count * (node_count - 1) / 2, 0.0);
  for (const auto& [u, v, w] : edges) {
    if (u == v || u < 0 || v < 0 || static_cast<std::size_t>(u) >= node_count ||
        static_cast<std::size_t>(v) >= node_count) {
      throw PartitionError("bad edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
    }
    graph.dense_[graph.dense_index(u, v)] = w;
  }
  return graph;
}

CollectionGraph build_graph(const std::vector<Segment>& segments, EmbeddingProvider& provider,
                            const SimilarityWeights& lambdas, double pos_cap,
                            std::optional<std::size_t> sparsify_top_m) {
  lambdas.validate();
  if (pos_cap <= 0.0) {
    throw ConfigError("pos_cap must be positive");
  }
  if (segments.size() < 2) {
    throw GraphTooSmallError("need at least 2 segments, got " +
                             std::to_string(segments.size()));
  }
  if (sparsify_top_m && *sparsify_top_m == 0) {
    throw ConfigError("sparsify_top_m must be positive when set");
  }

  const std::size_t n = segments.size();
  std::vector<std::string> head_texts;
  head_texts.reserve(n);
  for (const auto& seg : segments) {
    head_texts.push_back(seg.head_text);
  }
  const auto head_vectors = provider.embed_texts(head_texts);

  std::vector<EmbeddingVector> body_vectors;
  if (lambdas.body > 0.0) {
    std::vector<std::string> body_texts;
    body_texts.reserve(n);
    for (const auto& seg : segments) {
      body_texts.push_back(seg.body_text);
    }
    body_vectors = provider.embed_texts(body_texts);
  }

  CollectionGraph graph;
  graph.lambdas_ = lambdas;
  graph.pos_cap_ = pos_cap;
  graph.nodes_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SegmentNode node;
    node.node_id = static_cast<int>(i);
    node.doc_ind = segments[i].doc_ind;
    node.seg_ind = segments[i].seg_ind;
    node.head_text = segments[i].head_text;
    node.body_text = segments[i].body_text;
    node.head_span = segments[i].head_span;
    node.body_span = segments[i].body_span;
    node.head_vec = head_vectors[i];
    if (lambdas.body > 0.0) {
      node.body_vec = body_vectors[i];
    }
    graph.nodes_.push_back(std::move(node));
  }

  // Row-blocked fill keeps the peak footprint to the triangle itself.
  graph.dense_.assign(n * (n - 1) / 2, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    const std::size_t row_base = u * (2 * n - u - 1) / 2;
    for (std::size_t v = u + 1; v < n; ++v) {
      graph.dense_[row_base + (v - u - 1)] =
          edge_weight(graph.nodes_[u], graph.nodes_[v], lambdas, pos_cap);
    }
  }

  if (!sparsify_top_m) {
    return graph;
  }

  const std::size_t m = *sparsify_top_m;
  std::vector<std::set<int>> keep(n);
  std::vector<std::pair<double, int>> incident;
  for (std::size_t u = 0; u < n; ++u) {
    incident.clear();
    for (std::size_t v = 0; v < n; ++v) {
      if (v == u) {
        continue;
      }
      incident.emplace_back(graph.dense_[graph.dense_index(static_cast<int>(u),
                                                           static_cast<int>(v))],
                            static_cast<int>(v));
    }
    std::sort(incident.begin(), incident.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) {
        return a.first > b.first;
      }
      return a.second < b.second;
    });
    const std::size_t take = std::min(m, incident.size());
    for (std::size_t i = 0; i < take; ++i) {
      const int v = incident[i].second;
      keep[u].insert(v);
      keep[static_cast<std::size_t>(v)].insert(static_cast<int>(u));
    }
  }

  graph.sparse_ = true;
  graph.adjacency_.resize(n);
  for (std::size_t u = 0; u < n; ++u) {
    graph.adjacency_[u].reserve(keep[u].size());
    for (int v : keep[u]) {
      graph.adjacency_[u].emplace_back(
          v, graph.dense_[graph.dense_index(static_cast<int>(u), v)]);
    }
  }
  graph.dense_.clear();
  graph.dense_.shrink_to_fit();
  return graph;
}

void export_edges_tsv(const CollectionGraph& graph, std::ostream& out) {
  graph.for_each_edge([&](int u, int v, double w) {
    out << u << '\t' << v << '\t' << format_sig9(w) << '\n';
  });
}

void export_nodes_jsonl(const CollectionGraph& graph, std::ostream& out) {
  for (const auto& node : graph.nodes()) {
    nlohmann::ordered_json j;
    j["node_id"] = node.node_id;
    j["doc_ind"] = node.doc_ind;
    j["seg_ind"] = node.seg_ind;
    j["head_text"] = node.head_text;
    j["body_text"] = node.body_text;
    out << j.dump() << '\n';
  }
}

}  // namespace docstruct
