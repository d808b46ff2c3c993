#include "docstruct/headers.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>

#include "docstruct/errors.hpp"

namespace docstruct {

namespace {

bool is_pure_digits(std::string_view text) {
  if (text.empty()) {
    return false;
  }
  return std::all_of(text.begin(), text.end(),
                     [](char c) { return c >= '0' && c <= '9'; });
}

bool has_terminal_punctuation(std::string_view trimmed) {
  if (trimmed.empty()) {
    return false;
  }
  const char last = trimmed.back();
  return last == '.' || last == '!' || last == '?' || last == ';' || last == ',';
}

// Fraction of letter-initial tokens whose first ASCII letter is uppercase.
// Tokens without an ASCII letter do not count either way.
double titlecase_ratio(const std::vector<std::string_view>& tokens) {
  std::size_t considered = 0;
  std::size_t upper = 0;
  for (const auto& token : tokens) {
    for (char c : token) {
      if (c >= 'a' && c <= 'z') {
        ++considered;
        break;
      }
      if (c >= 'A' && c <= 'Z') {
        ++considered;
        ++upper;
        break;
      }
    }
  }
  return considered == 0 ? 0.0 : static_cast<double>(upper) / static_cast<double>(considered);
}

std::vector<std::regex> compile_patterns(const std::vector<std::string>& patterns) {
  std::vector<std::regex> compiled;
  compiled.reserve(patterns.size());
  for (const auto& pattern : patterns) {
    try {
      compiled.emplace_back(pattern, std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& e) {
      throw ConfigError("bad numbering pattern '" + pattern + "': " + e.what());
    }
  }
  return compiled;
}

double normalized_line_position(const Document& doc, std::size_t line_index) {
  const std::size_t m = doc.lines.size();
  if (m <= 1) {
    return 0.0;
  }
  return static_cast<double>(line_index) / static_cast<double>(m - 1);
}

std::vector<std::size_t> detect_with_patterns(const Document& doc,
                                              const HeaderRuleConfig& rules,
                                              const std::vector<std::regex>& patterns) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < doc.lines.size(); ++i) {
    const std::string_view trimmed = trim(doc.line_content(i));
    if (trimmed.empty()) {
      continue;
    }
    if (utf8::count(trimmed) > rules.max_header_chars) {
      continue;
    }
    const auto tokens = split_tokens(trimmed);
    if (tokens.size() > rules.max_header_tokens) {
      continue;
    }
    if (rules.require_no_terminal_punctuation && has_terminal_punctuation(trimmed)) {
      continue;
    }
    bool shaped = rules.titlecase_min_ratio == 0.0 ||
                  titlecase_ratio(tokens) >= rules.titlecase_min_ratio;
    if (!shaped) {
      const std::string line(trimmed);
      shaped = std::any_of(patterns.begin(), patterns.end(), [&](const std::regex& re) {
        return std::regex_search(line, re);
      });
    }
    if (shaped) {
      candidates.push_back(i);
    }
  }
  return candidates;
}

}  // namespace

std::vector<std::string> HeaderRuleConfig::default_numbering_patterns() {
  return {
      R"(^\d+(\.\d+)*[.):]?(\s|$))",                          // 3.  /  3.1  /  7)
      R"(^(item|part|section|article|chapter|appendix)\s+(\d+|[ivxlcdm]+)\b)",
      R"(^[IVXLCDM]{1,7}[.)](\s|$))",                         // IV.  /  XII)
  };
}

HeaderRuleConfig HeaderRuleConfig::caseless_defaults() {
  HeaderRuleConfig rules;
  rules.titlecase_min_ratio = 0.0;
  rules.max_header_tokens = 10;
  return rules;
}

void HeaderRuleConfig::validate() const {
  if (max_header_chars == 0) {
    throw ConfigError("max_header_chars must be positive");
  }
  if (max_header_tokens == 0) {
    throw ConfigError("max_header_tokens must be positive");
  }
  if (titlecase_min_ratio < 0.0 || titlecase_min_ratio > 1.0) {
    throw ConfigError("titlecase_min_ratio must be in [0,1]");
  }
  if (noise_doc_fraction <= 0.0 || noise_doc_fraction > 1.0) {
    throw ConfigError("noise_doc_fraction must be in (0,1]");
  }
  if (noise_position_spread < 0.0 || noise_position_spread > 1.0) {
    throw ConfigError("noise_position_spread must be in [0,1]");
  }
  compile_patterns(numbering_patterns);
}

std::vector<std::size_t> detect_header_candidates(const Document& doc,
                                                  const HeaderRuleConfig& rules) {
  return detect_with_patterns(doc, rules, compile_patterns(rules.numbering_patterns));
}

CandidateMap filter_collection_noise(const CandidateMap& per_doc_candidates,
                                     const Corpus& corpus,
                                     const HeaderRuleConfig& rules) {
  struct TextStats {
    std::set<int> docs;
    double min_pos = 1.0;
    double max_pos = 0.0;
  };
  std::map<std::string, TextStats> stats;

  auto normalized = [](std::string_view content) { return ascii_lower(trim(content)); };

  for (const auto& [doc_ind, lines] : per_doc_candidates) {
    const Document& doc = corpus.docs.at(static_cast<std::size_t>(doc_ind));
    for (std::size_t line : lines) {
      auto& entry = stats[normalized(doc.line_content(line))];
      entry.docs.insert(doc_ind);
      const double pos = normalized_line_position(doc, line);
      entry.min_pos = std::min(entry.min_pos, pos);
      entry.max_pos = std::max(entry.max_pos, pos);
    }
  }

  const auto n_docs = static_cast<double>(corpus.size());
  auto is_noise = [&](const std::string& text) {
    if (is_pure_digits(text)) {
      return true;
    }
    const TextStats& entry = stats.at(text);
    if (entry.docs.size() <= 1) {
      return false;
    }
    const double fraction = static_cast<double>(entry.docs.size()) / n_docs;
    const double spread = entry.max_pos - entry.min_pos;
    return fraction > rules.noise_doc_fraction && spread > rules.noise_position_spread;
  };

  CandidateMap filtered;
  for (const auto& [doc_ind, lines] : per_doc_candidates) {
    const Document& doc = corpus.docs.at(static_cast<std::size_t>(doc_ind));
    std::vector<std::size_t> kept;
    for (std::size_t line : lines) {
      if (!is_noise(normalized(doc.line_content(line)))) {
        kept.push_back(line);
      }
    }
    filtered.emplace(doc_ind, std::move(kept));
  }
  return filtered;
}

std::vector<Segment> segment_document(const Document& doc,
                                      const std::vector<std::size_t>& header_lines) {
  std::vector<Segment> segments;
  const std::size_t m = header_lines.size();
  if (m == 0) {
    return segments;
  }
  segments.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Span head = doc.lines.at(header_lines[i]);
    const std::size_t body_end =
        (i + 1 < m) ? doc.lines.at(header_lines[i + 1]).begin : doc.cp_size();

    Segment seg;
    seg.doc_ind = doc.doc_ind;
    seg.seg_ind = (m == 1) ? 0.0 : static_cast<double>(i) / static_cast<double>(m - 1);
    seg.head_span = head;
    seg.body_span = {head.end, body_end};
    seg.head_text = std::string(doc.line_content(header_lines[i]));
    seg.body_text = std::string(doc.slice(seg.body_span));
    segments.push_back(std::move(seg));
  }
  return segments;
}

std::vector<Segment> extract_segments(const Corpus& corpus, const HeaderRuleConfig& rules) {
  const auto patterns = compile_patterns(rules.numbering_patterns);
  CandidateMap candidates;
  for (const Document& doc : corpus.docs) {
    candidates.emplace(doc.doc_ind, detect_with_patterns(doc, rules, patterns));
  }
  candidates = filter_collection_noise(candidates, corpus, rules);

  std::vector<Segment> segments;
  for (const Document& doc : corpus.docs) {
    auto docSegments = segment_document(doc, candidates.at(doc.doc_ind));
    segments.insert(segments.end(), std::make_move_iterator(docSegments.begin()),
                    std::make_move_iterator(docSegments.end()));
  }
  return segments;
}

}  // namespace docstruct
