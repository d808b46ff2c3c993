#include "docstruct/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "docstruct/errors.hpp"

namespace docstruct {

namespace {

std::vector<std::string> split_lines(std::string_view raw) {
  std::vector<std::string> lines;
  std::string current;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (c == '\r') {
      if (i + 1 < raw.size() && raw[i + 1] == '\n') {
        ++i;
      }
      lines.push_back(std::move(current));
      current.clear();
    } else if (c == '\n') {
      lines.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  lines.push_back(std::move(current));
  return lines;
}

void rstrip_inplace(std::string& line) {
  std::size_t end = line.size();
  while (end > 0 && (line[end - 1] == ' ' || line[end - 1] == '\t')) {
    --end;
  }
  line.resize(end);
}

}  // namespace

std::string normalize_text(std::string_view raw) {
  std::vector<std::string> lines = split_lines(raw);
  for (auto& line : lines) {
    rstrip_inplace(line);
  }

  std::vector<std::string> kept;
  kept.reserve(lines.size());
  for (auto& line : lines) {
    if (line.empty() && !kept.empty() && kept.back().empty()) {
      continue;
    }
    kept.push_back(std::move(line));
  }

  std::string out;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (i > 0) {
      out.push_back('\n');
    }
    out += kept[i];
  }
  return out;
}

std::string_view Document::slice(Span span) const {
  const std::size_t n = cp_size();
  const std::size_t begin = std::min(span.begin, n);
  const std::size_t end = std::min(std::max(span.end, begin), n);
  return std::string_view(text).substr(cp_offsets[begin], cp_offsets[end] - cp_offsets[begin]);
}

std::string_view Document::line_content(std::size_t line_index) const {
  Span span = lines.at(line_index);
  std::string_view bytes = slice(span);
  if (!bytes.empty() && bytes.back() == '\n') {
    bytes.remove_suffix(1);
  }
  return bytes;
}

Document make_document(int doc_ind, std::string doc_id, std::string_view raw) {
  Document doc;
  doc.doc_ind = doc_ind;
  doc.doc_id = std::move(doc_id);
  doc.text = normalize_text(raw);
  doc.cp_offsets = utf8::code_point_offsets(doc.text);

  const std::size_t n = doc.cp_size();
  std::size_t line_start = 0;
  for (std::size_t cp = 0; cp < n; ++cp) {
    if (doc.text[doc.cp_offsets[cp]] == '\n') {
      doc.lines.push_back({line_start, cp + 1});
      line_start = cp + 1;
    }
  }
  if (line_start < n) {
    doc.lines.push_back({line_start, n});
  }
  return doc;
}

Corpus load_corpus(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw NoDocumentsError("not a directory: " + dir.string());
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) {
    throw NoDocumentsError("no readable files in " + dir.string());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

  Corpus corpus;
  corpus.docs.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::ifstream in(files[i], std::ios::binary);
    if (!in) {
      throw FileReadError("cannot open " + files[i].string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
      throw FileReadError("read failure on " + files[i].string());
    }
    try {
      corpus.docs.push_back(
          make_document(static_cast<int>(i), files[i].stem().string(), buffer.str()));
    } catch (const EncodingError& e) {
      throw EncodingError(files[i].string() + ": " + e.what());
    }
  }
  return corpus;
}

}  // namespace docstruct
