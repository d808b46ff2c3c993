#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "docstruct/util.hpp"

namespace docstruct {

// One plaintext document. The text is normalized and immutable after
// construction; all spans are counted in code points, not bytes, so that
// offsets survive multi-byte scripts.
struct Document {
  int doc_ind = 0;
  std::string doc_id;
  std::string text;

  // Line spans tile the text: each span covers the line content plus its
  // trailing newline; the final line may lack one.
  std::vector<Span> lines;

  // Byte offset per code point, with a trailing sentinel. Built once.
  std::vector<std::size_t> cp_offsets;

  std::size_t cp_size() const { return cp_offsets.empty() ? 0 : cp_offsets.size() - 1; }

  // UTF-8 bytes covered by a code-point span.
  std::string_view slice(Span span) const;

  // Line text without the trailing newline.
  std::string_view line_content(std::size_t line_index) const;
};

struct Corpus {
  std::vector<Document> docs;

  std::size_t size() const { return docs.size(); }
};

// Unifies line endings to '\n', strips trailing whitespace per line, and
// collapses runs of blank lines to a single one. Idempotent.
std::string normalize_text(std::string_view raw);

Document make_document(int doc_ind, std::string doc_id, std::string_view raw);

// Loads every regular file in dir (non-recursive), sorted by filename so
// doc_ind assignment is reproducible. Files must decode as UTF-8.
Corpus load_corpus(const std::filesystem::path& dir);

}  // namespace docstruct
