#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "docstruct/util.hpp"

namespace docstruct {

// Recipe for a synthetic collection with a known table of contents and
// grounding. Documents list the topics in canonical order, then jitter,
// omission, paraphrasing, and distractor insertion add realistic noise.
struct SynthSpec {
  int n_docs = 30;
  int n_topics = 6;
  int paraphrases_per_topic = 3;
  // topic -> header paraphrases; built deterministically when empty.
  std::map<int, std::vector<std::string>> paraphrase_dictionary;
  double distractor_rate = 0.2;  // per emitted topic slot
  int order_jitter = 2;          // max adjacent swaps per doc
  double omit_rate = 0.1;        // per topic per doc
  int body_sentences_min = 3;
  int body_sentences_max = 6;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GoldSpanRecord {
  std::string doc_id;
  std::string label;
  std::vector<Span> spans;
};

struct SynthCollection {
  std::vector<std::pair<std::string, std::string>> files;  // filename -> content
  std::map<int, std::vector<std::string>> paraphrases;     // resolved dictionary
  std::vector<std::string> gold_labels;                    // topic -> canonical label
  std::vector<GoldSpanRecord> gold_grounding;
};

// Headers within a topic share most of their character 3-grams; across
// topics they share almost none, so the hashing embedder separates them.
std::map<int, std::vector<std::string>> default_paraphrase_dictionary(int n_topics,
                                                                      int per_topic,
                                                                      std::uint64_t seed);

SynthCollection generate_collection(const SynthSpec& spec);

// Writes <out_dir>/corpus/*.txt, gold_toc.json and gold_grounding.jsonl.
void write_collection(const SynthCollection& collection,
                      const std::filesystem::path& out_dir);

// Jaccard similarity of the casefolded character 3-gram sets of two strings.
double trigram_jaccard(std::string_view a, std::string_view b);

}  // namespace docstruct
