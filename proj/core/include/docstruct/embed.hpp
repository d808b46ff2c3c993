#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace docstruct {

// Fixed-dimension unit vector. Normalized on construction; the all-zero
// input maps to the first basis vector so degenerate texts stay embeddable.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;

  static EmbeddingVector normalized(std::vector<double> values);
  static EmbeddingVector basis(std::size_t dim, std::size_t axis = 0);

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  bool is_unit(double tolerance = 1e-6) const;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {}
  std::vector<double> values_;
};

// Dot product of two unit vectors, clamped to [-1, 1].
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

enum class ProviderKind { remote, deterministic };

struct EmbeddingProviderConfig {
  ProviderKind kind = ProviderKind::deterministic;
  std::string endpoint;  // remote only, e.g. http://localhost:8089/embed
  std::size_t dim = 256;
  std::size_t batch_size = 32;
  std::vector<std::size_t> ngram_sizes = {2, 3, 4};  // deterministic only
  std::uint64_t seed = 0;                            // deterministic only
  int max_retries = 3;                               // remote only

  void validate() const;
};

// Hermetic fallback embedder: signed feature hashing of case-folded
// character n-grams. Paraphrases sharing n-grams land close in cosine.
EmbeddingVector deterministic_embed(std::string_view text,
                                    const EmbeddingProviderConfig& config);

// Run-scoped embedding facade. Caches by exact text, so repeated headers
// cost one provider call. Safe for concurrent use.
class EmbeddingProvider {
 public:
  explicit EmbeddingProvider(EmbeddingProviderConfig config);

  // One vector per text, order preserved. Empty-after-trim texts map to the
  // first basis vector without touching the provider.
  std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts);

  const EmbeddingProviderConfig& config() const { return config_; }

 private:
  std::vector<EmbeddingVector> fetch_remote(const std::vector<std::string>& texts);

  EmbeddingProviderConfig config_;
  std::mutex mutex_;
  std::unordered_map<std::string, EmbeddingVector> cache_;
};

// Convenience form of the operation; uses a fresh cache.
std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts,
                                         const EmbeddingProviderConfig& config);

}  // namespace docstruct
