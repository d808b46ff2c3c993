// docstruct CLI: extract a collection-wide table of contents from a
// directory of plaintext documents, ground it, and evaluate groundings.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "docstruct/communities.hpp"
#include "docstruct/config.hpp"
#include "docstruct/corpus.hpp"
#include "docstruct/errors.hpp"
#include "docstruct/eval.hpp"
#include "docstruct/graph.hpp"
#include "docstruct/headers.hpp"
#include "docstruct/pipeline.hpp"
#include "docstruct/synthgen.hpp"
#include "docstruct/toc.hpp"
#include "docstruct/util.hpp"

namespace {

namespace fs = std::filesystem;
using namespace docstruct;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> profile;
  std::optional<int> k;
};

PipelineConfig load_config(const CommonOptions& options) {
  if (options.config_path.empty()) {
    throw ConfigError("--config is required");
  }
  PipelineConfig config = PipelineConfig::from_file(options.config_path);
  if (options.profile) {
    config.lambdas = PipelineConfig::profile(*options.profile);
  }
  if (options.seed) {
    config.seed = *options.seed;
  }
  if (options.k) {
    config.k = *options.k;
  }
  config.validate();
  return config;
}

void add_common(CLI::App* cmd, CommonOptions& options, bool config_required = true) {
  auto* config_opt = cmd->add_option("--config", options.config_path, "pipeline config file");
  if (config_required) {
    config_opt->required();
  }
  cmd->add_option("--seed", options.seed, "override the pipeline seed");
  cmd->add_option("--profile", options.profile,
                  "lambda profile: strict, flexible or ordered-flexible");
  cmd->add_option("--k", options.k, "override the number of topics");
}

// Stage commands rerun the pipeline prefix they need; every stage is
// deterministic, so the artifacts match a full run with the same config.
struct StageContext {
  Corpus corpus;
  std::vector<Segment> segments;
};

StageContext run_to_segments(const PipelineConfig& config) {
  StageContext ctx;
  ctx.corpus = load_corpus(config.corpus_dir);
  ctx.segments = extract_segments(ctx.corpus, config.headers);
  return ctx;
}

CollectionGraph build_stage_graph(const PipelineConfig& config, const StageContext& ctx) {
  EmbeddingProvider provider(config.embedding);
  return build_graph(ctx.segments, provider, config.lambdas, config.pos_cap,
                     config.sparsify_top_m);
}

LouvainResult run_to_partition(const PipelineConfig& config, const CollectionGraph& graph) {
  LouvainConfig louvain_config = config.louvain;
  louvain_config.seed = seed_mix(config.seed, "louvain");
  return louvain_restarts(graph, louvain_config, config.restarts);
}

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw FileReadError("cannot write " + path.string());
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collection-wide table-of-contents extraction"};
  app.require_subcommand(1);

  CommonOptions opt_ingest, opt_detect, opt_graph, opt_communities, opt_toc, opt_ground,
      opt_run, opt_intrusion;

  auto* cmd_ingest = app.add_subcommand("ingest", "load and normalize the corpus");
  add_common(cmd_ingest, opt_ingest);

  auto* cmd_detect =
      app.add_subcommand("detect-headers", "detect headers and write segments.jsonl");
  add_common(cmd_detect, opt_detect);

  auto* cmd_graph =
      app.add_subcommand("build-graph", "build the segment graph and export it");
  add_common(cmd_graph, opt_graph);

  auto* cmd_communities =
      app.add_subcommand("communities", "run community detection, write partition.json");
  add_common(cmd_communities, opt_communities);

  auto* cmd_toc = app.add_subcommand("extract-toc", "select topics and write toc.json");
  add_common(cmd_toc, opt_toc);

  auto* cmd_ground =
      app.add_subcommand("ground", "write grounding.json alongside toc.json");
  add_common(cmd_ground, opt_ground);

  auto* cmd_run = app.add_subcommand("run", "run the full pipeline");
  add_common(cmd_run, opt_run);

  auto* cmd_eval = app.add_subcommand("evaluate", "score a predicted grounding against gold");
  std::string eval_pred, eval_gold, eval_mapping, eval_out;
  std::uint64_t eval_seed = 0;
  int eval_trials = 100;
  cmd_eval->add_option("--pred", eval_pred, "predicted grounding.json")->required();
  cmd_eval->add_option("--gold", eval_gold, "gold grounding JSONL with label strings")
      ->required();
  cmd_eval->add_option("--mapping", eval_mapping, "JSON map of topic_id to gold label")
      ->required();
  cmd_eval->add_option("--out", eval_out, "report path (default: stdout)");
  cmd_eval->add_option("--seed", eval_seed, "seed for the random baseline");
  cmd_eval->add_option("--trials", eval_trials, "random baseline trials");

  auto* cmd_intrusion =
      app.add_subcommand("intrusion-sample", "generate or score header intrusion samples");
  add_common(cmd_intrusion, opt_intrusion, /*config_required=*/false);
  int intrusion_count = 50;
  std::string intrusion_out, intrusion_samples, intrusion_annotations;
  cmd_intrusion->add_option("--count", intrusion_count, "number of samples to generate");
  cmd_intrusion->add_option("--out", intrusion_out, "samples output path (default: stdout)");
  cmd_intrusion->add_option("--samples", intrusion_samples,
                            "score mode: existing samples JSONL");
  cmd_intrusion->add_option("--annotations", intrusion_annotations,
                            "score mode: annotations JSONL");

  auto* cmd_synth = app.add_subcommand("synth-gen", "generate a synthetic collection");
  std::string synth_out;
  SynthSpec synth_spec;
  cmd_synth->add_option("--out", synth_out, "output directory")->required();
  cmd_synth->add_option("--n-docs", synth_spec.n_docs, "number of documents");
  cmd_synth->add_option("--n-topics", synth_spec.n_topics, "number of topics");
  cmd_synth->add_option("--paraphrases", synth_spec.paraphrases_per_topic,
                        "paraphrases per topic");
  cmd_synth->add_option("--distractor-rate", synth_spec.distractor_rate,
                        "distractor sections per topic slot");
  cmd_synth->add_option("--omit-rate", synth_spec.omit_rate, "topic omission probability");
  cmd_synth->add_option("--jitter", synth_spec.order_jitter, "max adjacent swaps per doc");
  cmd_synth->add_option("--body-min", synth_spec.body_sentences_min, "min body sentences");
  cmd_synth->add_option("--body-max", synth_spec.body_sentences_max, "max body sentences");
  cmd_synth->add_option("--seed", synth_spec.seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cmd_ingest->parsed()) {
      const PipelineConfig config = load_config(opt_ingest);
      const Corpus corpus = load_corpus(config.corpus_dir);
      std::size_t lines = 0;
      for (const auto& doc : corpus.docs) {
        lines += doc.lines.size();
      }
      std::cout << "loaded " << corpus.size() << " documents, " << lines << " lines\n";
    } else if (cmd_detect->parsed()) {
      const PipelineConfig config = load_config(opt_detect);
      const StageContext ctx = run_to_segments(config);
      const fs::path path = config.output_dir / "segments.jsonl";
      std::ofstream out = open_output(path);
      write_segments_jsonl(ctx.segments, ctx.corpus, out);
      std::cout << "wrote " << ctx.segments.size() << " segments to " << path.string()
                << '\n';
    } else if (cmd_graph->parsed()) {
      const PipelineConfig config = load_config(opt_graph);
      const StageContext ctx = run_to_segments(config);
      const CollectionGraph graph = build_stage_graph(config, ctx);
      fs::create_directories(config.output_dir);
      {
        std::ofstream out = open_output(config.output_dir / "edges.tsv");
        export_edges_tsv(graph, out);
      }
      {
        std::ofstream out = open_output(config.output_dir / "nodes.jsonl");
        export_nodes_jsonl(graph, out);
      }
      std::cout << "graph: " << graph.node_count() << " nodes, " << graph.edge_count()
                << " edges\n";
    } else if (cmd_communities->parsed()) {
      const PipelineConfig config = load_config(opt_communities);
      const StageContext ctx = run_to_segments(config);
      const CollectionGraph graph = build_stage_graph(config, ctx);
      const LouvainResult result = run_to_partition(config, graph);
      fs::create_directories(config.output_dir);
      std::ofstream out = open_output(config.output_dir / "partition.json");
      export_partition_json(result.partition, result.modularity, out);
      std::cout << "communities: " << result.partition.community_count()
                << ", modularity " << format_sig9(result.modularity) << '\n';
    } else if (cmd_toc->parsed() || cmd_ground->parsed()) {
      const PipelineConfig config = load_config(cmd_toc->parsed() ? opt_toc : opt_ground);
      const StageContext ctx = run_to_segments(config);
      const CollectionGraph graph = build_stage_graph(config, ctx);
      const LouvainResult result = run_to_partition(config, graph);
      const DocNodeIndex node_index = index_nodes_by_doc(graph);
      const Selection selection =
          select_topics(result.partition, config.k, ctx.corpus, node_index);
      const Toc toc = make_toc(selection, result.partition, graph, ctx.corpus);
      fs::create_directories(config.output_dir);
      {
        std::ofstream out = open_output(config.output_dir / "toc.json");
        write_toc_json(toc, out);
      }
      if (cmd_ground->parsed()) {
        const Grounding grounding = ground(toc, graph, ctx.corpus);
        std::ofstream out = open_output(config.output_dir / "grounding.json");
        write_grounding_jsonl(grounding, ctx.corpus, out);
        std::cout << "grounded " << grounding.spans.size() << " (topic, doc) pairs\n";
      } else {
        std::cout << "selected " << toc.entries.size() << " topics\n";
      }
    } else if (cmd_run->parsed()) {
      const PipelineConfig config = load_config(opt_run);
      const PipelineResult result = run_pipeline(config);
      std::cout << "documents " << result.documents << ", segments " << result.segments
                << ", communities " << result.communities << ", toc entries "
                << result.toc_entries << ", modularity " << format_sig9(result.modularity)
                << '\n';
      std::cout << "artifacts in " << config.output_dir.string() << '\n';
    } else if (cmd_eval->parsed()) {
      const EvalBundle bundle =
          run_eval(eval_pred, eval_gold, eval_mapping, eval_seed, eval_trials);
      if (eval_out.empty()) {
        write_eval_report_json(bundle.ours, bundle.most_frequent, bundle.random,
                               bundle.random_trials, std::cout);
      } else {
        std::ofstream out = open_output(eval_out);
        write_eval_report_json(bundle.ours, bundle.most_frequent, bundle.random,
                               bundle.random_trials, out);
        std::cout << "wrote " << eval_out << '\n';
      }
    } else if (cmd_intrusion->parsed()) {
      if (!intrusion_samples.empty() || !intrusion_annotations.empty()) {
        if (intrusion_samples.empty() || intrusion_annotations.empty()) {
          throw ConfigError("score mode needs both --samples and --annotations");
        }
        const auto samples = read_intrusion_samples_jsonl(intrusion_samples);
        const auto annotations = read_intrusion_annotations_jsonl(intrusion_annotations);
        const IntrusionScore score = score_intrusion(samples, annotations);
        nlohmann::ordered_json j;
        j["accuracy"] = score.accuracy;
        j["confidence_mean"] = score.confidence_mean;
        j["confidence_std"] = score.confidence_std;
        j["annotations"] = score.annotations;
        std::cout << j.dump(2) << '\n';
      } else {
        const PipelineConfig config = load_config(opt_intrusion);
        const StageContext ctx = run_to_segments(config);
        const CollectionGraph graph = build_stage_graph(config, ctx);
        const LouvainResult result = run_to_partition(config, graph);
        const auto samples =
            make_intrusion_samples(result.partition, graph, intrusion_count,
                                   seed_mix(config.seed, "intrusion"));
        if (intrusion_out.empty()) {
          write_intrusion_samples_jsonl(samples, std::cout);
        } else {
          std::ofstream out = open_output(intrusion_out);
          write_intrusion_samples_jsonl(samples, out);
          std::cout << "wrote " << samples.size() << " samples to " << intrusion_out << '\n';
        }
      }
    } else if (cmd_synth->parsed()) {
      const SynthCollection collection = generate_collection(synth_spec);
      write_collection(collection, synth_out);
      std::cout << "wrote " << collection.files.size() << " documents to " << synth_out
                << "/corpus\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SynthSpecError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
