#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>

#include "docstruct/config.hpp"
#include "docstruct/corpus.hpp"
#include "docstruct/eval.hpp"
#include "docstruct/headers.hpp"
#include "docstruct/toc.hpp"

namespace docstruct {

struct PipelineResult {
  std::size_t documents = 0;
  std::size_t segments = 0;
  std::size_t edges = 0;
  std::size_t communities = 0;
  std::size_t toc_entries = 0;
  std::size_t grounded_pairs = 0;
  double modularity = 0.0;
  Toc toc;
  Grounding grounding;
};

// Runs headers -> embed/graph -> communities -> toc and writes
// segments.jsonl, optional graph exports, partition.json, toc.json,
// grounding.json and run_manifest.json under config.output_dir. A failed
// stage renames artifacts written so far with a ".quarantine" suffix and
// rethrows as StageError.
PipelineResult run_pipeline(const PipelineConfig& config);

// One JSON object per segment with node ids in graph order.
void write_segments_jsonl(const std::vector<Segment>& segments, const Corpus& corpus,
                          std::ostream& out);

struct EvalBundle {
  EvalReport ours;
  EvalReport most_frequent;
  EvalReport random;
  int random_trials = 0;
};

// Scores a predicted grounding file against a gold one. The mapping file
// is a JSON object from predicted topic_id to gold label; unmapped topics
// are excluded from scoring.
EvalBundle run_eval(const std::filesystem::path& pred_grounding,
                    const std::filesystem::path& gold_grounding,
                    const std::filesystem::path& mapping_file, std::uint64_t seed = 0,
                    int random_trials = 100);

}  // namespace docstruct
