#include <doctest.h>

#include <cmath>

#include "docstruct/errors.hpp"
#include "docstruct/eval.hpp"
#include "test_support.hpp"

using namespace docstruct;
using testsupport::TempDir;

namespace {

std::vector<Span> spans(std::initializer_list<std::pair<std::size_t, std::size_t>> list) {
  std::vector<Span> out;
  for (const auto& [b, e] : list) {
    out.push_back({b, e});
  }
  return out;
}

}  // namespace

TEST_CASE("canonicalize merges touching and overlapping spans") {
  CHECK(canonicalize_spans(spans({{10, 20}, {20, 30}})) == spans({{10, 30}}));
  CHECK(canonicalize_spans(spans({{5, 15}, {10, 30}})) == spans({{5, 30}}));
  CHECK(canonicalize_spans(spans({{30, 40}, {10, 20}})) == spans({{10, 20}, {30, 40}}));
  CHECK(canonicalize_spans(spans({{3, 3}, {5, 9}})) == spans({{5, 9}}));
  CHECK(canonicalize_spans({}).empty());
}

TEST_CASE("match flags on identical, overlapping and disjoint sets") {
  {
    const auto flags = match_flags(spans({{10, 50}}), spans({{10, 50}}));
    CHECK(flags.partial_precision);
    CHECK(flags.partial_recall);
    CHECK(flags.exact_precision);
    CHECK(flags.exact_recall);
  }
  {
    const auto flags = match_flags(spans({{10, 50}}), spans({{30, 80}}));
    CHECK(flags.partial_precision);
    CHECK(flags.partial_recall);
    CHECK_FALSE(flags.exact_precision);
    CHECK_FALSE(flags.exact_recall);
  }
  {
    const auto flags = match_flags(spans({{10, 20}}), spans({{30, 40}}));
    CHECK_FALSE(flags.partial_precision);
    CHECK_FALSE(flags.exact_precision);
    CHECK_FALSE(flags.exact_recall);
  }
}

TEST_CASE("split spans covering the same characters compare equal") {
  const auto flags = match_flags(spans({{0, 10}, {10, 25}}), spans({{0, 25}}));
  CHECK(flags.exact_precision);
  CHECK(flags.exact_recall);
}

TEST_CASE("swapping pred and gold swaps precision and recall") {
  Rng rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    auto random_spans = [&rng] {
      std::vector<Span> out;
      const std::size_t n = rng.below(4);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t begin = rng.below(60);
        out.push_back({begin, begin + 1 + rng.below(15)});
      }
      return out;
    };
    const auto a = random_spans();
    const auto b = random_spans();
    const auto ab = match_flags(a, b);
    const auto ba = match_flags(b, a);
    CHECK(ab.partial_precision == ba.partial_recall);
    CHECK(ab.partial_recall == ba.partial_precision);
    CHECK(ab.exact_precision == ba.exact_recall);
    CHECK(ab.exact_recall == ba.exact_precision);
    // exact implies partial
    CHECK((!ab.exact_precision || ab.partial_precision));
    CHECK((!ab.exact_recall || ab.partial_recall));
  }
}

TEST_CASE("perfect predictions score 1.0 everywhere") {
  LabeledGrounding gold;
  gold[{"alpha", "d0"}] = spans({{0, 10}});
  gold[{"beta", "d0"}] = spans({{20, 30}});
  gold[{"alpha", "d1"}] = spans({{5, 15}});
  const EvalReport report = score_groundings(gold, gold);
  CHECK(report.micro.partial.f1 == doctest::Approx(1.0));
  CHECK(report.micro.exact.f1 == doctest::Approx(1.0));
  CHECK(report.macro.partial.f1 == doctest::Approx(1.0));
  CHECK(report.macro.exact.f1 == doctest::Approx(1.0));
}

TEST_CASE("disjoint predictions score zero") {
  LabeledGrounding gold;
  gold[{"alpha", "d0"}] = spans({{0, 10}});
  LabeledGrounding pred;
  pred[{"alpha", "d0"}] = spans({{50, 60}});
  const EvalReport report = score_groundings(pred, gold);
  CHECK(report.micro.partial.f1 == 0.0);
  CHECK(report.macro.exact.f1 == 0.0);
}

TEST_CASE("macro averages per-class scores unweighted") {
  // class A perfect in one doc, class B completely wrong in another
  LabeledGrounding gold;
  gold[{"A", "d0"}] = spans({{0, 10}});
  gold[{"B", "d1"}] = spans({{0, 10}});
  LabeledGrounding pred;
  pred[{"A", "d0"}] = spans({{0, 10}});
  pred[{"B", "d1"}] = spans({{90, 95}});
  const EvalReport report = score_groundings(pred, gold);
  CHECK(report.macro.partial.f1 == doctest::Approx(0.5));
}

TEST_CASE("evaluation without keys is an error") {
  CHECK_THROWS_AS(aggregate_scores({}), EmptyEvaluationError);
}

TEST_CASE("most frequent baseline predicts the plurality class") {
  LabeledGrounding gold;
  gold[{"A", "d0"}] = spans({{0, 5}, {10, 15}, {20, 25}});
  gold[{"B", "d0"}] = spans({{30, 35}, {40, 45}});
  const LabeledGrounding pred = baseline_most_frequent(gold);
  REQUIRE(pred.size() == 1);
  CHECK(pred.begin()->first.first == "A");
  // every gold span of the doc is claimed
  CHECK(pred.begin()->second == canonicalize_spans(spans({{0, 5}, {10, 15}, {20, 25}, {30, 35}, {40, 45}})));
}

TEST_CASE("most frequent baseline is perfect for one-class gold") {
  LabeledGrounding gold;
  gold[{"only", "d0"}] = spans({{0, 5}});
  gold[{"only", "d1"}] = spans({{3, 9}});
  const EvalReport report = score_groundings(baseline_most_frequent(gold), gold);
  CHECK(report.micro.exact.f1 == doctest::Approx(1.0));
  CHECK(report.macro.partial.f1 == doctest::Approx(1.0));
}

TEST_CASE("most frequent baseline scores zero exact F1 on multi-class gold") {
  LabeledGrounding gold;
  for (int d = 0; d < 4; ++d) {
    const std::string doc = "d" + std::to_string(d);
    gold[{"A", doc}] = spans({{0, 10}});
    gold[{"B", doc}] = spans({{10, 20}});
    gold[{"C", doc}] = spans({{20, 30}});
  }
  const EvalReport report = score_groundings(baseline_most_frequent(gold), gold);
  CHECK(report.micro.exact.f1 == 0.0);
  CHECK(report.macro.exact.f1 == 0.0);
  CHECK(report.micro.partial.f1 > 0.0);
}

TEST_CASE("random baseline is deterministic per seed and perfect on one class") {
  LabeledGrounding gold;
  gold[{"only", "d0"}] = spans({{0, 5}});
  gold[{"only", "d1"}] = spans({{2, 9}});
  const EvalReport a = baseline_random(gold, 42, 20);
  const EvalReport b = baseline_random(gold, 42, 20);
  CHECK(a.micro.partial.precision == b.micro.partial.precision);
  CHECK(a.macro.exact.f1 == b.macro.exact.f1);
  CHECK(a.micro.partial.f1 == doctest::Approx(1.0));
}

TEST_CASE("random baseline micro partial precision approaches 1/c") {
  // one span per document, labels equiprobable
  const int c = 4;
  LabeledGrounding gold;
  const std::vector<std::string> labels = {"w0", "w1", "w2", "w3"};
  for (int d = 0; d < 40; ++d) {
    gold[{labels[static_cast<std::size_t>(d % c)], "d" + std::to_string(d)}] =
        spans({{0, 50}});
  }
  const EvalReport mean = baseline_random(gold, 7, 2000);
  CHECK(std::abs(mean.micro.partial.precision - 1.0 / c) < 0.02);
}

namespace {

// Planted partition + graph carrying distinct header texts per node.
struct IntrusionFixture {
  CollectionGraph graph;
  Partition partition;
};

IntrusionFixture intrusion_fixture(const std::vector<int>& community_sizes) {
  IntrusionFixture fx;
  std::size_t n = 0;
  for (int s : community_sizes) {
    n += static_cast<std::size_t>(s);
  }
  std::vector<Segment> segments;
  int node = 0;
  for (std::size_t c = 0; c < community_sizes.size(); ++c) {
    for (int i = 0; i < community_sizes[c]; ++i) {
      Segment seg;
      seg.doc_ind = node;
      seg.seg_ind = 0.0;
      seg.head_text = "community " + std::to_string(c) + " header " + std::to_string(i);
      seg.body_text = "";
      segments.push_back(seg);
      fx.partition.assignment.push_back(static_cast<int>(c));
      ++node;
    }
  }
  EmbeddingProvider provider(EmbeddingProviderConfig{});
  fx.graph = build_graph(segments, provider, SimilarityWeights::strict());
  return fx;
}

}  // namespace

TEST_CASE("intrusion samples show 9 + 1 headers") {
  const auto fx = intrusion_fixture({20, 15});
  const auto samples = make_intrusion_samples(fx.partition, fx.graph, 25, 3);
  REQUIRE(samples.size() == 25);
  for (const auto& sample : samples) {
    REQUIRE(sample.shown_headers.size() == 10);
    CHECK(sample.intruder_position >= 0);
    CHECK(sample.intruder_position < 10);
    CHECK(sample.source_community != sample.intruder_community);
    const std::string source_tag = "community " + std::to_string(sample.source_community);
    const std::string intruder_tag =
        "community " + std::to_string(sample.intruder_community);
    int source_count = 0;
    for (int i = 0; i < 10; ++i) {
      const auto& header = sample.shown_headers[static_cast<std::size_t>(i)];
      if (i == sample.intruder_position) {
        CHECK(header.rfind(intruder_tag, 0) == 0);
      } else {
        CHECK(header.rfind(source_tag, 0) == 0);
        ++source_count;
      }
    }
    CHECK(source_count == 9);
  }
}

TEST_CASE("intrusion sampling is deterministic") {
  const auto fx = intrusion_fixture({12, 12, 12});
  const auto a = make_intrusion_samples(fx.partition, fx.graph, 10, 99);
  const auto b = make_intrusion_samples(fx.partition, fx.graph, 10, 99);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].shown_headers == b[i].shown_headers);
    CHECK(a[i].intruder_position == b[i].intruder_position);
  }
}

TEST_CASE("intrusion sampling needs two communities and nine distinct texts") {
  {
    const auto fx = intrusion_fixture({20});
    CHECK_THROWS_AS(make_intrusion_samples(fx.partition, fx.graph, 5, 1), CannotSampleError);
  }
  {
    const auto fx = intrusion_fixture({5, 5});
    CHECK_THROWS_AS(make_intrusion_samples(fx.partition, fx.graph, 5, 1), CannotSampleError);
  }
}

TEST_CASE("confidence follows the closed form") {
  const auto fx = intrusion_fixture({15, 15});
  const auto samples = make_intrusion_samples(fx.partition, fx.graph, 1, 5);
  for (int marked = 1; marked <= 10; ++marked) {
    IntrusionAnnotation annotation;
    annotation.sample_id = samples[0].sample_id;
    for (int i = 0; i < marked; ++i) {
      annotation.marked_positions.push_back(i);
    }
    const auto score = score_intrusion(samples, {annotation});
    CHECK(score.confidence_mean ==
          doctest::Approx(1.0 - (marked - 1) / 10.0).epsilon(1e-12));
  }
}

TEST_CASE("accuracy requires the intruder among the marks") {
  const auto fx = intrusion_fixture({15, 15});
  const auto samples = make_intrusion_samples(fx.partition, fx.graph, 1, 5);
  IntrusionAnnotation hit;
  hit.sample_id = samples[0].sample_id;
  hit.marked_positions = {samples[0].intruder_position};
  IntrusionAnnotation miss;
  miss.sample_id = samples[0].sample_id;
  miss.marked_positions = {(samples[0].intruder_position + 1) % 10};

  CHECK(score_intrusion(samples, {hit}).accuracy == 1.0);
  CHECK(score_intrusion(samples, {miss}).accuracy == 0.0);
  CHECK(score_intrusion(samples, {hit, miss}).accuracy == doctest::Approx(0.5));
}

TEST_CASE("annotations for unknown samples are rejected") {
  const auto fx = intrusion_fixture({15, 15});
  const auto samples = make_intrusion_samples(fx.partition, fx.graph, 1, 5);
  IntrusionAnnotation annotation;
  annotation.sample_id = "nope";
  annotation.marked_positions = {0};
  CHECK_THROWS_AS(score_intrusion(samples, {annotation}), AnnotationError);
}

TEST_CASE("intrusion sample files round-trip") {
  const auto fx = intrusion_fixture({15, 15});
  const auto samples = make_intrusion_samples(fx.partition, fx.graph, 5, 5);
  TempDir tmp("intrusion");
  {
    std::ofstream out(tmp.path() / "samples.jsonl");
    write_intrusion_samples_jsonl(samples, out);
  }
  const auto reread = read_intrusion_samples_jsonl(tmp.path() / "samples.jsonl");
  REQUIRE(reread.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(reread[i].sample_id == samples[i].sample_id);
    CHECK(reread[i].shown_headers == samples[i].shown_headers);
    CHECK(reread[i].intruder_position == samples[i].intruder_position);
  }

  testsupport::write_file(tmp.path() / "annotations.jsonl",
                          "{\"sample_id\": \"" + samples[0].sample_id +
                              "\", \"marked_positions\": [1, 2, 3]}\n");
  const auto annotations = read_intrusion_annotations_jsonl(tmp.path() / "annotations.jsonl");
  REQUIRE(annotations.size() == 1);
  CHECK(annotations[0].num_options == 10);
  const auto score = score_intrusion(samples, annotations);
  CHECK(score.confidence_mean == doctest::Approx(0.8));
}
