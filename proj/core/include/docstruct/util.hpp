#pragma once

#include <compare>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace docstruct {

// Half-open character range [begin, end), counted in Unicode code points.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end > begin ? end - begin : 0; }
  bool empty() const { return end <= begin; }

  friend auto operator<=>(const Span&, const Span&) = default;
};

namespace utf8 {

// Byte offset of every code point plus a trailing sentinel equal to
// text.size(). Throws EncodingError on malformed input.
std::vector<std::size_t> code_point_offsets(std::string_view text);

std::size_t count(std::string_view text);

}  // namespace utf8

std::uint64_t fnv1a64(std::string_view data);
std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent seed for a named pipeline stage from the single
// run seed. Stable across platforms.
std::uint64_t seed_mix(std::uint64_t seed, std::string_view stage);

// Seeded random source with portable bounded draws. std::shuffle and the
// standard distributions are implementation-defined, so every randomized
// operation in the library goes through this wrapper instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Unbiased draw in [0, n).
  std::uint64_t below(std::uint64_t n);

  // Draw in [0, 1).
  double unit();

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

  template <typename T>
  const T& pick(const std::vector<T>& values) {
    return values[below(values.size())];
  }

 private:
  std::mt19937_64 gen_;
};

std::string ascii_lower(std::string_view text);
std::string_view trim(std::string_view text);
std::vector<std::string_view> split_tokens(std::string_view text);

// Prints a double with 9 significant digits ("%.9g").
std::string format_sig9(double value);

}  // namespace docstruct
