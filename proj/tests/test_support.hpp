#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "docstruct/embed.hpp"
#include "docstruct/graph.hpp"
#include "docstruct/util.hpp"

namespace testsupport {

// Self-cleaning scratch directory.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    dir_ = std::filesystem::temp_directory_path() /
           ("docstruct_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline docstruct::EmbeddingVector random_unit_vector(docstruct::Rng& rng, std::size_t dim) {
  std::vector<double> values(dim);
  for (double& v : values) {
    v = rng.unit() * 2.0 - 1.0;
  }
  return docstruct::EmbeddingVector::normalized(std::move(values));
}

// Random complete weighted graph on n nodes with weights in [lo, hi].
inline docstruct::CollectionGraph random_graph(docstruct::Rng& rng, std::size_t n, double lo,
                                               double hi) {
  std::vector<std::tuple<int, int, double>> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      edges.emplace_back(static_cast<int>(u), static_cast<int>(v),
                         lo + rng.unit() * (hi - lo));
    }
  }
  return docstruct::CollectionGraph::from_edges(n, edges);
}

}  // namespace testsupport
