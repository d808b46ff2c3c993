#include "docstruct/embed.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "docstruct/errors.hpp"
#include "docstruct/util.hpp"

namespace docstruct {

namespace {

struct ParsedEndpoint {
  std::string host_port;  // scheme://host:port form accepted by httplib
  std::string path;
};

ParsedEndpoint parse_endpoint(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint must start with http://, got '" + endpoint + "'");
  }
  const std::string scheme = endpoint.substr(0, scheme_end);
  if (scheme != "http") {
    throw ConfigError("unsupported endpoint scheme '" + scheme + "'");
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  ParsedEndpoint parsed;
  if (path_start == std::string::npos) {
    parsed.host_port = endpoint;
    parsed.path = "/";
  } else {
    parsed.host_port = endpoint.substr(0, path_start);
    parsed.path = endpoint.substr(path_start);
  }
  return parsed;
}

std::uint64_t hash_ngram(std::string_view gram, std::uint64_t salt) {
  std::uint64_t h = splitmix64(salt);
  for (char c : gram) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

}  // namespace

EmbeddingVector EmbeddingVector::normalized(std::vector<double> values) {
  if (values.empty()) {
    throw DimensionError("cannot normalize an empty vector");
  }
  double norm_sq = 0.0;
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw ProviderProtocolError("non-finite embedding value");
    }
    norm_sq += v * v;
  }
  if (norm_sq < 1e-24) {
    return basis(values.size());
  }
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (double& v : values) {
    v *= inv;
  }
  return EmbeddingVector(std::move(values));
}

EmbeddingVector EmbeddingVector::basis(std::size_t dim, std::size_t axis) {
  if (dim == 0 || axis >= dim) {
    throw DimensionError("bad basis vector request");
  }
  std::vector<double> values(dim, 0.0);
  values[axis] = 1.0;
  return EmbeddingVector(std::move(values));
}

bool EmbeddingVector::is_unit(double tolerance) const {
  double norm_sq = 0.0;
  for (double v : values_) {
    norm_sq += v * v;
  }
  return std::abs(std::sqrt(norm_sq) - 1.0) <= tolerance;
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dim() != v.dim()) {
    throw DimensionError("cosine dimension mismatch: " + std::to_string(u.dim()) + " vs " +
                         std::to_string(v.dim()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) {
    dot += u[i] * v[i];
  }
  return std::clamp(dot, -1.0, 1.0);
}

void EmbeddingProviderConfig::validate() const {
  if (dim == 0) {
    throw ConfigError("embedding dim must be positive");
  }
  if (batch_size == 0) {
    throw ConfigError("embedding batch_size must be positive");
  }
  if (kind == ProviderKind::remote) {
    parse_endpoint(endpoint);
  } else {
    if (ngram_sizes.empty()) {
      throw ConfigError("deterministic embedder needs at least one n-gram size");
    }
    for (std::size_t n : ngram_sizes) {
      if (n == 0) {
        throw ConfigError("n-gram sizes must be positive");
      }
    }
  }
}

EmbeddingVector deterministic_embed(std::string_view text,
                                    const EmbeddingProviderConfig& config) {
  const std::string folded = ascii_lower(trim(text));
  if (folded.empty()) {
    return EmbeddingVector::basis(config.dim);
  }
  std::vector<double> accum(config.dim, 0.0);
  for (std::size_t n : config.ngram_sizes) {
    if (folded.size() < n) {
      continue;
    }
    const std::uint64_t salt = splitmix64(config.seed ^ (0x9E37ULL * n));
    for (std::size_t i = 0; i + n <= folded.size(); ++i) {
      const std::uint64_t h = hash_ngram(std::string_view(folded).substr(i, n), salt);
      const std::size_t bucket = h % config.dim;
      accum[bucket] += (h >> 63) ? 1.0 : -1.0;
    }
  }
  return EmbeddingVector::normalized(std::move(accum));
}

EmbeddingProvider::EmbeddingProvider(EmbeddingProviderConfig config)
    : config_(std::move(config)) {
  config_.validate();
}

std::vector<EmbeddingVector> EmbeddingProvider::fetch_remote(
    const std::vector<std::string>& texts) {
  const ParsedEndpoint endpoint = parse_endpoint(config_.endpoint);
  httplib::Client client(endpoint.host_port);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(60, 0);

  nlohmann::json body;
  body["texts"] = texts;
  const std::string payload = body.dump();

  httplib::Result res;
  for (int attempt = 0; attempt < std::max(1, config_.max_retries); ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
    }
    res = client.Post(endpoint.path, payload, "application/json");
    if (res && res->status < 500) {
      break;
    }
  }
  if (!res) {
    throw ProviderUnavailableError("embedding endpoint unreachable: " + config_.endpoint);
  }
  if (res->status >= 500) {
    throw ProviderUnavailableError("embedding endpoint kept failing with status " +
                                   std::to_string(res->status));
  }
  if (res->status < 200 || res->status >= 300) {
    throw ProviderProtocolError("embedding endpoint returned status " +
                                std::to_string(res->status));
  }

  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw ProviderProtocolError(std::string("malformed embedding response: ") + e.what());
  }
  if (!parsed.is_object() || !parsed.contains("vectors") || !parsed["vectors"].is_array()) {
    throw ProviderProtocolError("embedding response missing 'vectors' array");
  }
  const auto& vectors = parsed["vectors"];
  if (vectors.size() != texts.size()) {
    throw ProviderProtocolError("embedding response count mismatch: expected " +
                                std::to_string(texts.size()) + ", got " +
                                std::to_string(vectors.size()));
  }

  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& row : vectors) {
    if (!row.is_array() || row.size() != config_.dim) {
      throw ProviderProtocolError("embedding dimension mismatch: expected " +
                                  std::to_string(config_.dim));
    }
    std::vector<double> values;
    values.reserve(config_.dim);
    for (const auto& v : row) {
      if (!v.is_number()) {
        throw ProviderProtocolError("non-numeric embedding value");
      }
      values.push_back(v.get<double>());
    }
    out.push_back(EmbeddingVector::normalized(std::move(values)));
  }
  return out;
}

std::vector<EmbeddingVector> EmbeddingProvider::embed_texts(
    const std::vector<std::string>& texts) {
  std::vector<EmbeddingVector> result(texts.size());
  std::vector<std::string> missing;

  {
    std::lock_guard<std::mutex> lock(mutex_);
    std::unordered_set<std::string> queued;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (trim(texts[i]).empty()) {
        result[i] = EmbeddingVector::basis(config_.dim);
        continue;
      }
      auto it = cache_.find(texts[i]);
      if (it != cache_.end()) {
        result[i] = it->second;
      } else if (queued.insert(texts[i]).second) {
        missing.push_back(texts[i]);
      }
    }
  }

  if (!missing.empty()) {
    std::unordered_map<std::string, EmbeddingVector> fresh;
    if (config_.kind == ProviderKind::deterministic) {
      for (const auto& text : missing) {
        fresh.emplace(text, deterministic_embed(text, config_));
      }
    } else {
      for (std::size_t start = 0; start < missing.size(); start += config_.batch_size) {
        const std::size_t stop = std::min(missing.size(), start + config_.batch_size);
        std::vector<std::string> batch(missing.begin() + static_cast<long>(start),
                                       missing.begin() + static_cast<long>(stop));
        auto vectors = fetch_remote(batch);
        for (std::size_t i = 0; i < batch.size(); ++i) {
          fresh.emplace(batch[i], std::move(vectors[i]));
        }
      }
    }
    std::lock_guard<std::mutex> lock(mutex_);
    for (auto& [text, vec] : fresh) {
      cache_.emplace(text, std::move(vec));
    }
  }

  {
    std::lock_guard<std::mutex> lock(mutex_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (result[i].dim() == 0) {
        result[i] = cache_.at(texts[i]);
      }
    }
  }
  return result;
}

std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts,
                                         const EmbeddingProviderConfig& config) {
  EmbeddingProvider provider(config);
  return provider.embed_texts(texts);
}

}  // namespace docstruct
