#pragma once

#include <map>
#include <string>
#include <vector>

#include "docstruct/corpus.hpp"

namespace docstruct {

// Rule thresholds for header candidate detection and collection-wide noise
// filtering. Defaults target cased English corpora; caseless scripts set
// titlecase_min_ratio to 0 and lean on length plus numbering patterns.
struct HeaderRuleConfig {
  std::size_t max_header_chars = 100;  // code points after trimming
  std::size_t max_header_tokens = 12;
  bool require_no_terminal_punctuation = true;
  double titlecase_min_ratio = 0.6;  // 0 disables the case rule
  std::vector<std::string> numbering_patterns = default_numbering_patterns();
  double noise_doc_fraction = 0.5;
  double noise_position_spread = 0.3;

  static std::vector<std::string> default_numbering_patterns();
  static HeaderRuleConfig english_defaults() { return {}; }
  static HeaderRuleConfig caseless_defaults();

  void validate() const;
};

// Line indices of header candidates, keyed by doc_ind.
using CandidateMap = std::map<int, std::vector<std::size_t>>;

std::vector<std::size_t> detect_header_candidates(const Document& doc,
                                                  const HeaderRuleConfig& rules);

// Drops candidate texts that recur across many documents at scattered
// positions (page furniture, signatures) and pure-digit lines. A text seen
// in a single document is never dropped by the recurrence rule.
CandidateMap filter_collection_noise(const CandidateMap& per_doc_candidates,
                                     const Corpus& corpus,
                                     const HeaderRuleConfig& rules);

// A (header, body) region. seg_ind is the normalized sequential position of
// the segment within its document: i/(m-1) for the i-th of m segments, 0 for
// a lone segment.
struct Segment {
  int doc_ind = 0;
  double seg_ind = 0.0;
  std::string head_text;
  std::string body_text;
  Span head_span;
  Span body_span;
};

// One segment per header line; the body runs to the next header (or document
// end). Text before the first header belongs to no segment.
std::vector<Segment> segment_document(const Document& doc,
                                      const std::vector<std::size_t>& header_lines);

// detect -> filter -> segment over the whole corpus, in doc_ind order.
std::vector<Segment> extract_segments(const Corpus& corpus, const HeaderRuleConfig& rules);

}  // namespace docstruct
