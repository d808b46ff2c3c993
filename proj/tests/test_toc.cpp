#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "docstruct/corpus.hpp"
#include "docstruct/errors.hpp"
#include "docstruct/headers.hpp"
#include "docstruct/toc.hpp"
#include "test_support.hpp"

using namespace docstruct;
using testsupport::TempDir;

namespace {

DocNodeIndex index_of(const std::vector<std::vector<int>>& docs) {
  DocNodeIndex index;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    index[static_cast<int>(d)] = docs[d];
  }
  return index;
}

Corpus corpus_of(std::size_t n) {
  Corpus corpus;
  for (std::size_t i = 0; i < n; ++i) {
    corpus.docs.push_back(make_document(static_cast<int>(i), "d" + std::to_string(i), ""));
  }
  return corpus;
}

// Exhaustive coverage maximum over all k-subsets of communities; test-side
// oracle, independent of the greedy path.
double exhaustive_best_coverage(const std::vector<std::vector<int>>& communities, int k,
                                const Corpus& corpus, const DocNodeIndex& index) {
  const int n = static_cast<int>(communities.size());
  std::vector<int> pick;
  double best = 0.0;
  auto recurse = [&](auto&& self, int start) -> void {
    if (static_cast<int>(pick.size()) == k) {
      std::vector<std::vector<int>> chosen;
      for (int c : pick) {
        chosen.push_back(communities[static_cast<std::size_t>(c)]);
      }
      best = std::max(best, coverage(chosen, corpus, index));
      return;
    }
    for (int c = start; c < n; ++c) {
      pick.push_back(c);
      self(self, c + 1);
      pick.pop_back();
    }
  };
  recurse(recurse, 0);
  return best;
}

}  // namespace

TEST_CASE("coverage counts per-document fractions") {
  // 2 docs with 4 segments each
  const auto index = index_of({{0, 1, 2, 3}, {4, 5, 6, 7}});
  const Corpus corpus = corpus_of(2);

  CHECK(coverage({{0, 1, 2, 3, 4, 5, 6, 7}}, corpus, index) == doctest::Approx(2.0));
  CHECK(coverage({}, corpus, index) == 0.0);
  CHECK(coverage({{0, 1}, {4, 5, 6, 7}}, corpus, index) == doctest::Approx(1.5));
}

TEST_CASE("select_topics returns everything when k equals the community count") {
  Partition partition;
  partition.assignment = {0, 1, 2, 0, 1, 2};
  const auto index = index_of({{0, 1, 2}, {3, 4, 5}});
  const auto selection = select_topics(partition, 3, corpus_of(2), index);
  std::vector<int> ids = selection.community_ids;
  std::sort(ids.begin(), ids.end());
  CHECK(ids == std::vector<int>{0, 1, 2});
}

TEST_CASE("select_topics takes the largest marginal first") {
  // doc0: {0,1}, doc1: {2,3,4,5}
  Partition partition;
  partition.assignment = {0, 1, 1, 1, 2, 2};
  const auto index = index_of({{0, 1}, {2, 3, 4, 5}});
  // community 0 -> 0.5, community 1 -> 0.5 + 0.5 = 1.0, community 2 -> 0.5
  const auto selection = select_topics(partition, 1, corpus_of(2), index);
  CHECK(selection.community_ids == std::vector<int>{1});
  CHECK(selection.marginal_gains[0] == doctest::Approx(1.0));
}

TEST_CASE("select_topics rejects k beyond the community count") {
  Partition partition;
  partition.assignment = {0, 0, 1};
  const auto index = index_of({{0, 1, 2}});
  CHECK_THROWS_AS(select_topics(partition, 3, corpus_of(1), index),
                  NotEnoughCommunitiesError);
}

TEST_CASE("selection ties prefer the larger community") {
  // two communities with identical coverage gain, different sizes
  Partition partition;
  partition.assignment = {0, 0, 1, 2, 2, 2};
  // doc0 holds {0,1} (community 0), doc1 holds {2} (community 1),
  // doc2 holds {3,4,5} (community 2); every community covers one full doc.
  const auto index = index_of({{0, 1}, {2}, {3, 4, 5}});
  const auto selection = select_topics(partition, 1, corpus_of(3), index);
  CHECK(selection.community_ids == std::vector<int>{2});
}

TEST_CASE("greedy marginal gains never increase") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n_nodes = 12 + rng.below(8);
    const int n_docs = 3;
    const int n_comm = 4 + static_cast<int>(rng.below(3));
    Partition partition;
    std::vector<std::vector<int>> docs(static_cast<std::size_t>(n_docs));
    for (std::size_t node = 0; node < n_nodes; ++node) {
      partition.assignment.push_back(static_cast<int>(rng.below(n_comm)));
      docs[rng.below(n_docs)].push_back(static_cast<int>(node));
    }
    partition.canonicalize();
    const auto index = index_of(docs);
    const int total = partition.community_count();
    const auto selection =
        select_topics(partition, total, corpus_of(static_cast<std::size_t>(n_docs)), index);
    for (std::size_t i = 1; i < selection.marginal_gains.size(); ++i) {
      CHECK(selection.marginal_gains[i] <= selection.marginal_gains[i - 1] + 1e-12);
    }
  }
}

TEST_CASE("greedy coverage meets the (1 - 1/e) guarantee") {
  Rng rng(29);
  const double floor_ratio = 1.0 - 1.0 / std::exp(1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n_nodes = 14 + rng.below(10);
    const int n_docs = 4;
    const int n_comm = 5 + static_cast<int>(rng.below(4));
    Partition partition;
    std::vector<std::vector<int>> docs(static_cast<std::size_t>(n_docs));
    for (std::size_t node = 0; node < n_nodes; ++node) {
      partition.assignment.push_back(static_cast<int>(rng.below(n_comm)));
      docs[rng.below(n_docs)].push_back(static_cast<int>(node));
    }
    partition.canonicalize();
    const auto index = index_of(docs);
    const auto corpus = corpus_of(static_cast<std::size_t>(n_docs));
    const int k = 1 + static_cast<int>(rng.below(3));
    if (k > partition.community_count()) {
      continue;
    }

    const auto selection = select_topics(partition, k, corpus, index);
    const auto communities = partition.members();
    std::vector<std::vector<int>> chosen;
    for (int c : selection.community_ids) {
      chosen.push_back(communities[static_cast<std::size_t>(c)]);
    }
    const double greedy = coverage(chosen, corpus, index);
    const double optimal = exhaustive_best_coverage(communities, k, corpus, index);
    CHECK(greedy >= floor_ratio * optimal - 1e-9);
    CHECK(greedy <= optimal + 1e-9);
  }
}

TEST_CASE("selected coverage never decreases with k") {
  Rng rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n_nodes = 20 + rng.below(10);
    const int n_docs = 4;
    const int n_comm = 6;
    Partition partition;
    std::vector<std::vector<int>> docs(static_cast<std::size_t>(n_docs));
    for (std::size_t node = 0; node < n_nodes; ++node) {
      partition.assignment.push_back(static_cast<int>(rng.below(n_comm)));
      docs[rng.below(n_docs)].push_back(static_cast<int>(node));
    }
    partition.canonicalize();
    const auto index = index_of(docs);
    const auto corpus = corpus_of(static_cast<std::size_t>(n_docs));
    const auto communities = partition.members();

    double previous = -1.0;
    for (int k = 1; k <= partition.community_count(); ++k) {
      const auto selection = select_topics(partition, k, corpus, index);
      std::vector<std::vector<int>> chosen;
      for (int c : selection.community_ids) {
        chosen.push_back(communities[static_cast<std::size_t>(c)]);
      }
      const double value = coverage(chosen, corpus, index);
      CHECK(value >= previous - 1e-12);
      previous = value;
    }
  }
}

TEST_CASE("medoid maximizes in-community weight") {
  const auto graph =
      CollectionGraph::from_edges(3, {{0, 1, 0.9}, {0, 2, 0.8}, {1, 2, 0.1}});
  CHECK(community_medoid({0, 1, 2}, graph) == 0);
  CHECK(community_medoid({2}, graph) == 2);

  const auto uniform =
      CollectionGraph::from_edges(3, {{0, 1, 0.5}, {0, 2, 0.5}, {1, 2, 0.5}});
  CHECK(community_medoid({0, 1, 2}, uniform) == 0);  // tie -> lowest id
  CHECK(community_medoid({1, 2, 0}, uniform) == 0);
}

namespace {

struct GroundFixture {
  Corpus corpus;
  CollectionGraph graph;
  Toc toc;
};

// Three-doc corpus segmented by real header detection; communities are
// assigned by header text so the grounding behavior is fully controlled.
GroundFixture make_ground_fixture() {
  GroundFixture fx;
  const std::string body = "lowercase body filler line with plenty of words to stay body.\n";
  auto doc_text = [&](const std::vector<std::string>& headers) {
    std::string text;
    for (const auto& h : headers) {
      text += h + "\n" + body;
    }
    return text;
  };
  // header texts are unique per document so the collection noise filter
  // leaves everything in place
  TempDir tmp("ground");
  testsupport::write_file(tmp.path() / "doc0.txt",
                          doc_text({"Alpha One", "Alpha Two", "Beta One"}));
  testsupport::write_file(tmp.path() / "doc1.txt",
                          doc_text({"Alpha Three", "Beta Two", "Alpha Four"}));
  testsupport::write_file(tmp.path() / "doc2.txt", doc_text({"Gamma One", "Gamma Two"}));
  fx.corpus = load_corpus(tmp.path());

  const auto segments = extract_segments(fx.corpus, HeaderRuleConfig());
  REQUIRE(segments.size() == 8);
  EmbeddingProvider provider(EmbeddingProviderConfig{});
  fx.graph = build_graph(segments, provider, SimilarityWeights::ordered_flexible());

  // topic 0 = Alpha*, topic 1 = Beta*
  TocEntry alpha;
  alpha.topic_id = 0;
  TocEntry beta;
  beta.topic_id = 1;
  for (const auto& node : fx.graph.nodes()) {
    if (node.head_text.rfind("Alpha", 0) == 0) {
      alpha.community.push_back(node.node_id);
    } else if (node.head_text.rfind("Beta", 0) == 0) {
      beta.community.push_back(node.node_id);
    }
  }
  alpha.medoid_node = alpha.community.front();
  beta.medoid_node = beta.community.front();
  alpha.label = fx.graph.node(alpha.medoid_node).head_text;
  beta.label = fx.graph.node(beta.medoid_node).head_text;
  fx.toc.entries = {alpha, beta};
  fx.toc.k = 2;
  return fx;
}

}  // namespace

TEST_CASE("grounding merges adjacent same-topic segments") {
  const GroundFixture fx = make_ground_fixture();
  const Grounding grounding = ground(fx.toc, fx.graph, fx.corpus);

  // doc0 = [Alpha, Alpha, Beta]: one merged Alpha span, one Beta span
  CHECK(grounding.spans.at({0, 0}).size() == 1);
  CHECK(grounding.spans.at({1, 0}).size() == 1);

  // doc1 = [Alpha, Beta, Alpha]: two disjoint Alpha spans
  const auto& alpha_doc1 = grounding.spans.at({0, 1});
  REQUIRE(alpha_doc1.size() == 2);
  CHECK(alpha_doc1[0].end <= alpha_doc1[1].begin);

  // doc2 has no selected segment at all
  CHECK(grounding.spans.count({0, 2}) == 0);
  CHECK(grounding.spans.count({1, 2}) == 0);
}

TEST_CASE("grounded spans start at their header text") {
  const GroundFixture fx = make_ground_fixture();
  const Grounding grounding = ground(fx.toc, fx.graph, fx.corpus);
  for (const auto& [key, spans] : grounding.spans) {
    const auto& doc = fx.corpus.docs.at(static_cast<std::size_t>(key.second));
    for (const Span& span : spans) {
      const std::string_view text = doc.slice(span);
      const bool alpha = text.rfind("Alpha", 0) == 0;
      const bool beta = text.rfind("Beta", 0) == 0;
      CHECK((key.first == 0 ? alpha : beta));
      CHECK(span.end <= doc.cp_size());
    }
  }
}

TEST_CASE("grounding spans stay disjoint and sorted per key") {
  const GroundFixture fx = make_ground_fixture();
  const Grounding grounding = ground(fx.toc, fx.graph, fx.corpus);
  for (const auto& [key, spans] : grounding.spans) {
    for (std::size_t i = 1; i < spans.size(); ++i) {
      CHECK(spans[i - 1].end <= spans[i].begin);
    }
  }
}

TEST_CASE("toc and grounding files round-trip") {
  const GroundFixture fx = make_ground_fixture();
  const Grounding grounding = ground(fx.toc, fx.graph, fx.corpus);

  TempDir tmp("tocio");
  {
    std::ofstream out(tmp.path() / "toc.json");
    write_toc_json(fx.toc, out);
  }
  const Toc reread = read_toc_json(tmp.path() / "toc.json");
  REQUIRE(reread.entries.size() == fx.toc.entries.size());
  for (std::size_t i = 0; i < reread.entries.size(); ++i) {
    CHECK(reread.entries[i].topic_id == fx.toc.entries[i].topic_id);
    CHECK(reread.entries[i].label == fx.toc.entries[i].label);
    CHECK(reread.entries[i].community == fx.toc.entries[i].community);
  }

  {
    std::ofstream out(tmp.path() / "grounding.json");
    write_grounding_jsonl(grounding, fx.corpus, out);
  }
  const auto records = read_grounding_jsonl(tmp.path() / "grounding.json");
  CHECK(records.size() == grounding.spans.size());
  for (const auto& record : records) {
    CHECK_FALSE(record.topic_is_label);
    CHECK_FALSE(record.spans.empty());
  }
}

TEST_CASE("grounding reader reports malformed lines") {
  TempDir tmp("badground");
  testsupport::write_file(tmp.path() / "bad.jsonl",
                          "{\"doc_id\": \"a\", \"topic_id\": 0, \"spans\": [[0, 4]]}\n"
                          "{broken json\n");
  try {
    read_grounding_jsonl(tmp.path() / "bad.jsonl");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
}
