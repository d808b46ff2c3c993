#include "docstruct/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "docstruct/errors.hpp"
#include "docstruct/util.hpp"

namespace docstruct {

namespace {

namespace fs = std::filesystem;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void quarantine_artifacts(const fs::path& dir, const std::vector<std::string>& names) {
  for (const auto& name : names) {
    const fs::path from = dir / name;
    std::error_code ec;
    if (fs::exists(from, ec)) {
      fs::rename(from, dir / (name + ".quarantine"), ec);
    }
  }
}

}  // namespace

void write_segments_jsonl(const std::vector<Segment>& segments, const Corpus& corpus,
                          std::ostream& out) {
  int node_id = 0;
  for (const auto& seg : segments) {
    nlohmann::ordered_json j;
    j["node_id"] = node_id++;
    j["doc_ind"] = seg.doc_ind;
    j["doc_id"] = corpus.docs.at(static_cast<std::size_t>(seg.doc_ind)).doc_id;
    j["seg_ind"] = seg.seg_ind;
    j["head_text"] = seg.head_text;
    j["body_text"] = seg.body_text;
    j["head_span"] = {seg.head_span.begin, seg.head_span.end};
    j["body_span"] = {seg.body_span.begin, seg.body_span.end};
    out << j.dump() << '\n';
  }
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  config.validate();
  fs::create_directories(config.output_dir);

  std::vector<std::string> written;
  nlohmann::ordered_json timings;
  std::string stage = "ingest";

  try {
    auto t0 = Clock::now();
    const Corpus corpus = load_corpus(config.corpus_dir);
    timings["ingest_ms"] = elapsed_ms(t0);

    stage = "headers";
    t0 = Clock::now();
    const std::vector<Segment> segments = extract_segments(corpus, config.headers);
    {
      std::ofstream out(config.output_dir / "segments.jsonl", std::ios::binary);
      if (!out) {
        throw FileReadError("cannot write " +
                            (config.output_dir / "segments.jsonl").string());
      }
      write_segments_jsonl(segments, corpus, out);
      written.push_back("segments.jsonl");
    }
    timings["headers_ms"] = elapsed_ms(t0);

    stage = "graph";
    t0 = Clock::now();
    EmbeddingProvider provider(config.embedding);
    const CollectionGraph graph = build_graph(segments, provider, config.lambdas,
                                              config.pos_cap, config.sparsify_top_m);
    if (config.export_graph) {
      std::ofstream edges(config.output_dir / "edges.tsv", std::ios::binary);
      export_edges_tsv(graph, edges);
      written.push_back("edges.tsv");
      std::ofstream nodes(config.output_dir / "nodes.jsonl", std::ios::binary);
      export_nodes_jsonl(graph, nodes);
      written.push_back("nodes.jsonl");
    }
    timings["graph_ms"] = elapsed_ms(t0);

    stage = "communities";
    t0 = Clock::now();
    LouvainConfig louvain_config = config.louvain;
    louvain_config.seed = seed_mix(config.seed, "louvain");
    const LouvainResult louvain_result =
        louvain_restarts(graph, louvain_config, config.restarts);
    {
      std::ofstream out(config.output_dir / "partition.json", std::ios::binary);
      export_partition_json(louvain_result.partition, louvain_result.modularity, out);
      written.push_back("partition.json");
    }
    timings["communities_ms"] = elapsed_ms(t0);

    stage = "toc";
    t0 = Clock::now();
    const DocNodeIndex node_index = index_nodes_by_doc(graph);
    const Selection selection =
        select_topics(louvain_result.partition, config.k, corpus, node_index);
    const Toc toc = make_toc(selection, louvain_result.partition, graph, corpus);
    const Grounding grounding = ground(toc, graph, corpus);
    {
      std::ofstream out(config.output_dir / "toc.json", std::ios::binary);
      write_toc_json(toc, out);
      written.push_back("toc.json");
    }
    {
      std::ofstream out(config.output_dir / "grounding.json", std::ios::binary);
      write_grounding_jsonl(grounding, corpus, out);
      written.push_back("grounding.json");
    }
    timings["toc_ms"] = elapsed_ms(t0);

    PipelineResult result;
    result.documents = corpus.size();
    result.segments = segments.size();
    result.edges = graph.edge_count();
    result.communities = static_cast<std::size_t>(louvain_result.partition.community_count());
    result.toc_entries = toc.entries.size();
    result.grounded_pairs = grounding.spans.size();
    result.modularity = louvain_result.modularity;
    result.toc = toc;
    result.grounding = grounding;

    nlohmann::ordered_json manifest;
    manifest["config_hash"] = config.config_hash();
    manifest["seed"] = config.seed;
    manifest["timings_ms"] = timings;
    manifest["counts"]["documents"] = result.documents;
    manifest["counts"]["segments"] = result.segments;
    manifest["counts"]["edges"] = result.edges;
    manifest["counts"]["communities"] = result.communities;
    manifest["counts"]["toc_entries"] = result.toc_entries;
    manifest["counts"]["grounded_pairs"] = result.grounded_pairs;
    manifest["modularity"] = result.modularity;
    {
      std::ofstream out(config.output_dir / "run_manifest.json", std::ios::binary);
      out << manifest.dump(2) << '\n';
    }
    return result;
  } catch (const Error& e) {
    quarantine_artifacts(config.output_dir, written);
    throw StageError(stage, e.what());
  } catch (const std::exception& e) {
    quarantine_artifacts(config.output_dir, written);
    throw StageError(stage, e.what());
  }
}

EvalBundle run_eval(const std::filesystem::path& pred_grounding,
                    const std::filesystem::path& gold_grounding,
                    const std::filesystem::path& mapping_file, std::uint64_t seed,
                    int random_trials) {
  const auto pred_records = read_grounding_jsonl(pred_grounding);
  const auto gold_records = read_grounding_jsonl(gold_grounding);

  std::ifstream mapping_in(mapping_file);
  if (!mapping_in) {
    throw FileReadError("cannot open " + mapping_file.string());
  }
  nlohmann::json mapping_json;
  try {
    mapping_in >> mapping_json;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(mapping_file.string() + ": " + e.what());
  }
  if (!mapping_json.is_object()) {
    throw FormatError(mapping_file.string() + ": expected a JSON object");
  }
  std::map<int, std::string> mapping;
  for (const auto& [key, value] : mapping_json.items()) {
    int topic_id = 0;
    try {
      topic_id = std::stoi(key);
    } catch (const std::exception&) {
      throw FormatError(mapping_file.string() + ": non-integer topic id '" + key + "'");
    }
    if (!value.is_string()) {
      throw FormatError(mapping_file.string() + ": label for topic " + key +
                        " must be a string");
    }
    mapping[topic_id] = value.get<std::string>();
  }

  LabeledGrounding pred;
  for (const auto& record : pred_records) {
    std::string label;
    if (record.topic_is_label) {
      label = record.topic_label;
    } else {
      const auto it = mapping.find(record.topic_id);
      if (it == mapping.end()) {
        continue;  // unmapped predicted topic: excluded from scoring
      }
      label = it->second;
    }
    auto& spans = pred[{label, record.doc_id}];
    spans.insert(spans.end(), record.spans.begin(), record.spans.end());
  }
  for (auto& [key, spans] : pred) {
    spans = canonicalize_spans(spans);
  }
  if (pred.empty()) {
    throw EmptyEvaluationError("no predicted topics align with the mapping file");
  }

  LabeledGrounding gold;
  for (const auto& record : gold_records) {
    if (!record.topic_is_label) {
      throw FormatError(gold_grounding.string() + ": gold topic ids must be label strings");
    }
    auto& spans = gold[{record.topic_label, record.doc_id}];
    spans.insert(spans.end(), record.spans.begin(), record.spans.end());
  }
  for (auto& [key, spans] : gold) {
    spans = canonicalize_spans(spans);
  }
  if (gold.empty()) {
    throw EmptyEvaluationError("gold grounding is empty");
  }

  EvalBundle bundle;
  bundle.ours = score_groundings(pred, gold);
  bundle.most_frequent = score_groundings(baseline_most_frequent(gold), gold);
  bundle.random = baseline_random(gold, seed_mix(seed, "random-baseline"), random_trials);
  bundle.random_trials = random_trials;
  return bundle;
}

}  // namespace docstruct
