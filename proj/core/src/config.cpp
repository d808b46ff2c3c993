#include "docstruct/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "docstruct/errors.hpp"
#include "docstruct/util.hpp"

namespace docstruct {

namespace {

struct ConfigEntry {
  std::string value;
  bool consumed = false;
};

// section -> key -> value(s). Repeated keys accumulate in file order.
using RawConfig = std::map<std::string, std::map<std::string, std::vector<ConfigEntry>>>;

RawConfig parse_ini(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path.string());
  }
  RawConfig raw;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // strip comments: '#' at line start or preceded by whitespace
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.resize(i);
        break;
      }
    }
    const std::string_view stripped = trim(line);
    if (stripped.empty()) {
      continue;
    }
    if (stripped.front() == '[') {
      if (stripped.back() != ']' || stripped.size() < 3) {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": bad section header");
      }
      section = std::string(trim(stripped.substr(1, stripped.size() - 2)));
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected key = value");
    }
    const std::string key(trim(stripped.substr(0, eq)));
    const std::string value(trim(stripped.substr(eq + 1)));
    if (key.empty()) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": empty key");
    }
    raw[section][key].push_back({value, false});
  }
  return raw;
}

class ConfigReader {
 public:
  ConfigReader(RawConfig raw, std::filesystem::path base)
      : raw_(std::move(raw)), base_(std::move(base)) {}

  bool has(const std::string& section, const std::string& key) {
    const auto sit = raw_.find(section);
    return sit != raw_.end() && sit->second.count(key) > 0;
  }

  std::string get_string(const std::string& section, const std::string& key) {
    auto& entries = raw_.at(section).at(key);
    for (auto& e : entries) {
      e.consumed = true;
    }
    return entries.back().value;
  }

  std::vector<std::string> get_all(const std::string& section, const std::string& key) {
    auto& entries = raw_.at(section).at(key);
    std::vector<std::string> values;
    for (auto& e : entries) {
      e.consumed = true;
      values.push_back(e.value);
    }
    return values;
  }

  template <typename T>
  T get_number(const std::string& section, const std::string& key) {
    const std::string text = get_string(section, key);
    T value{};
    std::istringstream stream(text);
    stream >> value;
    if (stream.fail()) {
      throw ConfigError("bad numeric value for " + qualify(section, key) + ": '" + text + "'");
    }
    std::string rest;
    stream >> rest;
    if (!rest.empty()) {
      throw ConfigError("bad numeric value for " + qualify(section, key) + ": '" + text + "'");
    }
    return value;
  }

  bool get_bool(const std::string& section, const std::string& key) {
    const std::string text = ascii_lower(get_string(section, key));
    if (text == "true" || text == "1" || text == "yes" || text == "on") {
      return true;
    }
    if (text == "false" || text == "0" || text == "no" || text == "off") {
      return false;
    }
    throw ConfigError("bad boolean for " + qualify(section, key) + ": '" + text + "'");
  }

  std::filesystem::path get_path(const std::string& section, const std::string& key) {
    std::filesystem::path p = get_string(section, key);
    if (p.is_relative()) {
      p = base_ / p;
    }
    return p;
  }

  void reject_unknown() const {
    for (const auto& [section, keys] : raw_) {
      for (const auto& [key, entries] : keys) {
        for (const auto& e : entries) {
          if (!e.consumed) {
            throw ConfigError("unknown config key " + qualify(section, key));
          }
        }
      }
    }
  }

 private:
  static std::string qualify(const std::string& section, const std::string& key) {
    return section.empty() ? key : "[" + section + "] " + key;
  }

  RawConfig raw_;
  std::filesystem::path base_;
};

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const std::string token(trim(item));
    if (token.empty()) {
      continue;
    }
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      throw ConfigError("bad integer in list: '" + token + "'");
    }
    values.push_back(value);
  }
  return values;
}

}  // namespace

SimilarityWeights PipelineConfig::profile(const std::string& name) {
  if (name == "strict") {
    return SimilarityWeights::strict();
  }
  if (name == "flexible") {
    return SimilarityWeights::flexible();
  }
  if (name == "ordered-flexible") {
    return SimilarityWeights::ordered_flexible();
  }
  throw ConfigError("unknown profile '" + name +
                    "' (expected strict, flexible or ordered-flexible)");
}

void PipelineConfig::validate() const {
  if (corpus_dir.empty()) {
    throw ConfigError("corpus_dir is required");
  }
  if (output_dir.empty()) {
    throw ConfigError("output_dir is required");
  }
  if (k < 1) {
    throw ConfigError("k must be a positive integer");
  }
  if (restarts < 1) {
    throw ConfigError("restarts must be positive");
  }
  if (pos_cap <= 0.0) {
    throw ConfigError("pos_cap must be positive");
  }
  if (sparsify_top_m && *sparsify_top_m == 0) {
    throw ConfigError("sparsify_top_m must be positive when set");
  }
  headers.validate();
  embedding.validate();
  lambdas.validate();
  louvain.validate();
}

PipelineConfig PipelineConfig::from_file(const std::filesystem::path& path) {
  ConfigReader reader(parse_ini(path), std::filesystem::absolute(path).parent_path());
  PipelineConfig config;

  if (reader.has("", "profile")) {
    config.lambdas = profile(reader.get_string("", "profile"));
  }
  if (reader.has("", "corpus_dir")) {
    config.corpus_dir = reader.get_path("", "corpus_dir");
  }
  if (reader.has("", "output_dir")) {
    config.output_dir = reader.get_path("", "output_dir");
  }
  if (reader.has("", "k")) {
    config.k = reader.get_number<int>("", "k");
  }
  if (reader.has("", "seed")) {
    config.seed = reader.get_number<std::uint64_t>("", "seed");
  }
  if (reader.has("", "restarts")) {
    config.restarts = reader.get_number<int>("", "restarts");
  }
  if (reader.has("", "pos_cap")) {
    config.pos_cap = reader.get_number<double>("", "pos_cap");
  }
  if (reader.has("", "sparsify_top_m")) {
    config.sparsify_top_m = reader.get_number<std::size_t>("", "sparsify_top_m");
  }
  if (reader.has("", "export_graph")) {
    config.export_graph = reader.get_bool("", "export_graph");
  }

  if (reader.has("lambdas", "head")) {
    config.lambdas.head = reader.get_number<double>("lambdas", "head");
  }
  if (reader.has("lambdas", "body")) {
    config.lambdas.body = reader.get_number<double>("lambdas", "body");
  }
  if (reader.has("lambdas", "pos")) {
    config.lambdas.pos = reader.get_number<double>("lambdas", "pos");
  }

  auto& h = config.headers;
  if (reader.has("headers", "max_header_chars")) {
    h.max_header_chars = reader.get_number<std::size_t>("headers", "max_header_chars");
  }
  if (reader.has("headers", "max_header_tokens")) {
    h.max_header_tokens = reader.get_number<std::size_t>("headers", "max_header_tokens");
  }
  if (reader.has("headers", "require_no_terminal_punctuation")) {
    h.require_no_terminal_punctuation =
        reader.get_bool("headers", "require_no_terminal_punctuation");
  }
  if (reader.has("headers", "titlecase_min_ratio")) {
    h.titlecase_min_ratio = reader.get_number<double>("headers", "titlecase_min_ratio");
  }
  if (reader.has("headers", "noise_doc_fraction")) {
    h.noise_doc_fraction = reader.get_number<double>("headers", "noise_doc_fraction");
  }
  if (reader.has("headers", "noise_position_spread")) {
    h.noise_position_spread = reader.get_number<double>("headers", "noise_position_spread");
  }
  if (reader.has("headers", "numbering_pattern")) {
    h.numbering_patterns = reader.get_all("headers", "numbering_pattern");
  }

  auto& e = config.embedding;
  if (reader.has("embedding", "kind")) {
    const std::string kind = reader.get_string("embedding", "kind");
    if (kind == "remote") {
      e.kind = ProviderKind::remote;
    } else if (kind == "deterministic") {
      e.kind = ProviderKind::deterministic;
    } else {
      throw ConfigError("unknown embedding kind '" + kind + "'");
    }
  }
  if (reader.has("embedding", "endpoint")) {
    e.endpoint = reader.get_string("embedding", "endpoint");
  }
  if (reader.has("embedding", "dim")) {
    e.dim = reader.get_number<std::size_t>("embedding", "dim");
  }
  if (reader.has("embedding", "batch_size")) {
    e.batch_size = reader.get_number<std::size_t>("embedding", "batch_size");
  }
  if (reader.has("embedding", "ngram_sizes")) {
    e.ngram_sizes = parse_size_list(reader.get_string("embedding", "ngram_sizes"));
  }
  if (reader.has("embedding", "seed")) {
    e.seed = reader.get_number<std::uint64_t>("embedding", "seed");
  }
  if (reader.has("embedding", "max_retries")) {
    e.max_retries = reader.get_number<int>("embedding", "max_retries");
  }

  auto& l = config.louvain;
  if (reader.has("louvain", "resolution")) {
    l.resolution = reader.get_number<double>("louvain", "resolution");
  }
  if (reader.has("louvain", "min_modularity_gain")) {
    l.min_modularity_gain = reader.get_number<double>("louvain", "min_modularity_gain");
  }
  if (reader.has("louvain", "max_passes")) {
    l.max_passes = reader.get_number<int>("louvain", "max_passes");
  }

  reader.reject_unknown();
  config.validate();
  return config;
}

std::string PipelineConfig::canonical_string() const {
  std::ostringstream out;
  out << "corpus_dir=" << corpus_dir.string() << '\n';
  out << "k=" << k << '\n';
  out << "seed=" << seed << '\n';
  out << "restarts=" << restarts << '\n';
  out << "pos_cap=" << format_sig9(pos_cap) << '\n';
  out << "sparsify_top_m=" << (sparsify_top_m ? std::to_string(*sparsify_top_m) : "none")
      << '\n';
  out << "lambdas=" << format_sig9(lambdas.head) << ',' << format_sig9(lambdas.body) << ','
      << format_sig9(lambdas.pos) << '\n';
  out << "headers=" << headers.max_header_chars << ',' << headers.max_header_tokens << ','
      << headers.require_no_terminal_punctuation << ','
      << format_sig9(headers.titlecase_min_ratio) << ','
      << format_sig9(headers.noise_doc_fraction) << ','
      << format_sig9(headers.noise_position_spread) << '\n';
  for (const auto& pattern : headers.numbering_patterns) {
    out << "numbering_pattern=" << pattern << '\n';
  }
  out << "embedding=" << (embedding.kind == ProviderKind::remote ? "remote" : "deterministic")
      << ',' << embedding.endpoint << ',' << embedding.dim << ',' << embedding.batch_size
      << ',' << embedding.seed << '\n';
  out << "ngram_sizes=";
  for (std::size_t i = 0; i < embedding.ngram_sizes.size(); ++i) {
    out << (i ? "," : "") << embedding.ngram_sizes[i];
  }
  out << '\n';
  out << "louvain=" << format_sig9(louvain.resolution) << ','
      << format_sig9(louvain.min_modularity_gain) << ',' << louvain.max_passes << '\n';
  return out.str();
}

std::string PipelineConfig::config_hash() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_string())));
  return buf;
}

}  // namespace docstruct
