#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "docstruct/communities.hpp"
#include "docstruct/graph.hpp"
#include "docstruct/util.hpp"

namespace docstruct {

// Sorts spans, drops empty ones, and merges overlapping or touching ones.
// Two span lists covering the same character set canonicalize identically.
std::vector<Span> canonicalize_spans(std::vector<Span> spans);

struct MatchFlags {
  bool partial_precision = false;
  bool partial_recall = false;
  bool exact_precision = false;
  bool exact_recall = false;
};

// Span-set comparison for one (label, doc) key. Exact precision holds when
// pred covers no character outside gold; exact recall the mirror image;
// partial when they intersect. Both empty counts as a full match, exactly
// one empty as a total miss.
MatchFlags match_flags(const std::vector<Span>& pred, const std::vector<Span>& gold);

// (label, doc_id) -> canonical spans.
using LabeledGrounding = std::map<std::pair<std::string, std::string>, std::vector<Span>>;

struct KeyedFlags {
  std::string label;
  std::string doc_id;
  bool pred_nonempty = false;
  bool gold_nonempty = false;
  MatchFlags flags;
};

// Flags over the union of keys present in either grounding.
std::vector<KeyedFlags> compute_flags(const LabeledGrounding& pred,
                                      const LabeledGrounding& gold);

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ScoreBlock {
  Scores partial;
  Scores exact;
};

struct EvalReport {
  ScoreBlock macro;  // per-label scores averaged unweighted over labels
  ScoreBlock micro;  // hits pooled over all keys
};

EvalReport aggregate_scores(const std::vector<KeyedFlags>& flags);

EvalReport score_groundings(const LabeledGrounding& pred, const LabeledGrounding& gold);

// Predicts every gold-labeled span as the label with the most gold spans
// collection-wide (ties: lexicographically smallest label).
LabeledGrounding baseline_most_frequent(const LabeledGrounding& gold);

// Relabels each gold span uniformly at random per trial and averages the
// resulting reports. Seeded and deterministic.
EvalReport baseline_random(const LabeledGrounding& gold, std::uint64_t seed, int trials);

struct IntrusionSample {
  std::string sample_id;
  std::vector<std::string> shown_headers;  // exactly 10
  int intruder_position = 0;               // 0..9
  int source_community = 0;
  int intruder_community = 0;
};

struct IntrusionAnnotation {
  std::string sample_id;
  std::vector<int> marked_positions;  // non-empty
  int num_options = 10;
};

// Each sample shows 9 distinct headers from one community and 1 from
// another, shuffled. Source communities need >= 9 distinct header texts.
std::vector<IntrusionSample> make_intrusion_samples(const Partition& partition,
                                                    const CollectionGraph& graph, int count,
                                                    std::uint64_t seed);

struct IntrusionScore {
  double accuracy = 0.0;
  double confidence_mean = 0.0;
  double confidence_std = 0.0;
  int annotations = 0;
};

// confidence = 1 - (num_marked - 1)/num_options; an annotation is accurate
// when the intruder is among the marked positions.
IntrusionScore score_intrusion(const std::vector<IntrusionSample>& samples,
                               const std::vector<IntrusionAnnotation>& annotations);

void write_intrusion_samples_jsonl(const std::vector<IntrusionSample>& samples,
                                   std::ostream& out);
std::vector<IntrusionSample> read_intrusion_samples_jsonl(const std::filesystem::path& path);
std::vector<IntrusionAnnotation> read_intrusion_annotations_jsonl(
    const std::filesystem::path& path);

void write_eval_report_json(const EvalReport& ours, const EvalReport& most_frequent,
                            const EvalReport& random, int random_trials, std::ostream& out);

}  // namespace docstruct
