#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "docstruct/communities.hpp"
#include "docstruct/embed.hpp"
#include "docstruct/graph.hpp"
#include "docstruct/headers.hpp"

namespace docstruct {

// Full pipeline configuration; loadable from a flat key=value file with
// [sections]. One pipeline seed feeds every randomized stage, salted per
// stage name.
struct PipelineConfig {
  std::filesystem::path corpus_dir;
  std::filesystem::path output_dir;
  HeaderRuleConfig headers;
  EmbeddingProviderConfig embedding;
  SimilarityWeights lambdas = SimilarityWeights::ordered_flexible();
  double pos_cap = kDefaultPosCap;
  std::optional<std::size_t> sparsify_top_m;
  LouvainConfig louvain;
  int k = 0;
  int restarts = 1;
  std::uint64_t seed = 0;
  bool export_graph = false;

  void validate() const;

  // Relative paths resolve against the config file's directory.
  static PipelineConfig from_file(const std::filesystem::path& path);

  // strict | flexible | ordered-flexible
  static SimilarityWeights profile(const std::string& name);

  // Canonical key=value dump used for the manifest's config hash.
  std::string canonical_string() const;
  std::string config_hash() const;
};

}  // namespace docstruct
