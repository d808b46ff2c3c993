#include "docstruct/communities.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "docstruct/errors.hpp"
#include "docstruct/util.hpp"

namespace docstruct {

namespace {

// Aggregated working graph for one Louvain level. Self-loop weights follow
// the adjacency convention A_ii = 2 * (collapsed intra weight), which keeps
// modularity identical across levels.
struct LevelGraph {
  std::vector<std::vector<std::pair<int, double>>> adjacency;
  std::vector<double> self_loop;
  std::vector<double> degree;  // self_loop + incident weight
  double two_m = 0.0;

  std::size_t size() const { return adjacency.size(); }
};

LevelGraph level_from_collection(const CollectionGraph& graph) {
  LevelGraph level;
  const std::size_t n = graph.node_count();
  level.adjacency.resize(n);
  level.self_loop.assign(n, 0.0);
  level.degree.assign(n, 0.0);
  graph.for_each_edge([&](int u, int v, double w) {
    if (w <= 0.0) {
      return;
    }
    level.adjacency[static_cast<std::size_t>(u)].emplace_back(v, w);
    level.adjacency[static_cast<std::size_t>(v)].emplace_back(u, w);
    level.degree[static_cast<std::size_t>(u)] += w;
    level.degree[static_cast<std::size_t>(v)] += w;
  });
  level.two_m = std::accumulate(level.degree.begin(), level.degree.end(), 0.0);
  return level;
}

double level_modularity(const LevelGraph& level, const std::vector<int>& comm,
                        double resolution) {
  if (level.two_m <= 0.0) {
    return 0.0;
  }
  int community_count = 0;
  for (int c : comm) {
    community_count = std::max(community_count, c + 1);
  }
  std::vector<double> sigma_in(static_cast<std::size_t>(community_count), 0.0);
  std::vector<double> sigma_tot(static_cast<std::size_t>(community_count), 0.0);
  for (std::size_t u = 0; u < level.size(); ++u) {
    const auto cu = static_cast<std::size_t>(comm[u]);
    sigma_tot[cu] += level.degree[u];
    sigma_in[cu] += level.self_loop[u];
    for (const auto& [v, w] : level.adjacency[u]) {
      if (comm[static_cast<std::size_t>(v)] == comm[u]) {
        sigma_in[cu] += w;  // both directions visited, so this doubles
      }
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < sigma_in.size(); ++c) {
    const double tot = sigma_tot[c] / level.two_m;
    q += sigma_in[c] / level.two_m - resolution * tot * tot;
  }
  return q;
}

// One local-move phase. comm is updated in place; returns true if any node
// moved.
bool local_moves(const LevelGraph& level, std::vector<int>& comm, double resolution,
                 Rng& rng) {
  const std::size_t n = level.size();
  std::vector<double> sigma_tot(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    sigma_tot[static_cast<std::size_t>(comm[u])] += level.degree[u];
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  std::vector<double> weight_to(n, 0.0);
  std::vector<int> touched;
  bool any_move = false;
  bool moved = true;
  int sweeps = 0;
  while (moved && sweeps < 10000) {
    moved = false;
    ++sweeps;
    for (int u : order) {
      const auto su = static_cast<std::size_t>(u);
      const int old_comm = comm[su];

      touched.clear();
      weight_to[static_cast<std::size_t>(old_comm)] = 0.0;
      touched.push_back(old_comm);
      for (const auto& [v, w] : level.adjacency[su]) {
        const int c = comm[static_cast<std::size_t>(v)];
        if (weight_to[static_cast<std::size_t>(c)] == 0.0 &&
            std::find(touched.begin(), touched.end(), c) == touched.end()) {
          touched.push_back(c);
        }
        weight_to[static_cast<std::size_t>(c)] += w;
      }

      // Detach u, then compare insertion gains; the old community competes
      // on the same footing. gain(c) = k_ic - resolution*sigma_tot(c)*k_u/2m.
      sigma_tot[static_cast<std::size_t>(old_comm)] -= level.degree[su];
      const double k_u = level.degree[su];
      int best_comm = old_comm;
      double best_gain = weight_to[static_cast<std::size_t>(old_comm)] -
                         resolution * sigma_tot[static_cast<std::size_t>(old_comm)] * k_u /
                             level.two_m;
      std::sort(touched.begin(), touched.end());
      for (int c : touched) {
        const double gain = weight_to[static_cast<std::size_t>(c)] -
                            resolution * sigma_tot[static_cast<std::size_t>(c)] * k_u /
                                level.two_m;
        if (gain > best_gain + 1e-12 /* strict improvement */) {
          best_gain = gain;
          best_comm = c;
        }
      }
      sigma_tot[static_cast<std::size_t>(best_comm)] += level.degree[su];
      comm[su] = best_comm;
      if (best_comm != old_comm) {
        moved = true;
        any_move = true;
      }
      for (int c : touched) {
        weight_to[static_cast<std::size_t>(c)] = 0.0;
      }
    }
  }
  return any_move;
}

// Collapses communities into super nodes, preserving modularity.
LevelGraph aggregate(const LevelGraph& level, const std::vector<int>& comm,
                     int community_count) {
  LevelGraph next;
  const auto c = static_cast<std::size_t>(community_count);
  next.adjacency.resize(c);
  next.self_loop.assign(c, 0.0);
  next.degree.assign(c, 0.0);
  next.two_m = level.two_m;

  std::vector<std::vector<double>> cross(c);
  for (auto& row : cross) {
    row.assign(c, 0.0);
  }
  for (std::size_t u = 0; u < level.size(); ++u) {
    const auto cu = static_cast<std::size_t>(comm[u]);
    next.self_loop[cu] += level.self_loop[u];
    for (const auto& [v, w] : level.adjacency[u]) {
      const auto cv = static_cast<std::size_t>(comm[static_cast<std::size_t>(v)]);
      if (cu == cv) {
        next.self_loop[cu] += w;  // u->v and v->u both land here: A_ii = 2w
      } else {
        cross[cu][cv] += w;
      }
    }
  }
  for (std::size_t a = 0; a < c; ++a) {
    next.degree[a] = next.self_loop[a];
    for (std::size_t b = 0; b < c; ++b) {
      if (cross[a][b] > 0.0) {
        next.adjacency[a].emplace_back(static_cast<int>(b), cross[a][b]);
        next.degree[a] += cross[a][b];
      }
    }
  }
  return next;
}

int renumber(std::vector<int>& comm) {
  std::vector<int> remap(comm.size(), -1);
  int next_id = 0;
  for (int& c : comm) {
    if (remap[static_cast<std::size_t>(c)] < 0) {
      remap[static_cast<std::size_t>(c)] = next_id++;
    }
    c = remap[static_cast<std::size_t>(c)];
  }
  return next_id;
}

}  // namespace

Partition Partition::singletons(std::size_t node_count) {
  Partition p;
  p.assignment.resize(node_count);
  std::iota(p.assignment.begin(), p.assignment.end(), 0);
  return p;
}

int Partition::community_count() const {
  int count = 0;
  for (int c : assignment) {
    count = std::max(count, c + 1);
  }
  return count;
}

std::vector<std::vector<int>> Partition::members() const {
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(community_count()));
  for (std::size_t node = 0; node < assignment.size(); ++node) {
    groups[static_cast<std::size_t>(assignment[node])].push_back(static_cast<int>(node));
  }
  return groups;
}

void Partition::canonicalize() {
  renumber(assignment);
}

void Partition::validate(std::size_t node_count) const {
  if (assignment.size() != node_count) {
    throw PartitionError("partition covers " + std::to_string(assignment.size()) +
                         " nodes, graph has " + std::to_string(node_count));
  }
  const int count = community_count();
  std::vector<bool> seen(static_cast<std::size_t>(count), false);
  for (int c : assignment) {
    if (c < 0) {
      throw PartitionError("negative community id");
    }
    seen[static_cast<std::size_t>(c)] = true;
  }
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (!seen[c]) {
      throw PartitionError("community ids are not contiguous: missing " + std::to_string(c));
    }
  }
}

void LouvainConfig::validate() const {
  if (resolution <= 0.0) {
    throw ConfigError("louvain resolution must be positive");
  }
  if (min_modularity_gain <= 0.0) {
    throw ConfigError("min_modularity_gain must be positive");
  }
  if (max_passes <= 0) {
    throw ConfigError("max_passes must be positive");
  }
}

double modularity(const CollectionGraph& graph, const Partition& partition,
                  double resolution) {
  partition.validate(graph.node_count());
  double two_m = 0.0;
  graph.for_each_edge([&](int, int, double w) {
    if (w > 0.0) {
      two_m += 2.0 * w;
    }
  });
  if (two_m <= 0.0) {
    return 0.0;
  }

  const auto count = static_cast<std::size_t>(partition.community_count());
  std::vector<double> sigma_in(count, 0.0);
  std::vector<double> sigma_tot(count, 0.0);
  graph.for_each_edge([&](int u, int v, double w) {
    if (w <= 0.0) {
      return;
    }
    const auto cu = static_cast<std::size_t>(partition.assignment[static_cast<std::size_t>(u)]);
    const auto cv = static_cast<std::size_t>(partition.assignment[static_cast<std::size_t>(v)]);
    sigma_tot[cu] += w;
    sigma_tot[cv] += w;
    if (cu == cv) {
      sigma_in[cu] += 2.0 * w;
    }
  });

  double q = 0.0;
  for (std::size_t c = 0; c < count; ++c) {
    const double tot = sigma_tot[c] / two_m;
    q += sigma_in[c] / two_m - resolution * tot * tot;
  }
  return q;
}

LouvainResult louvain(const CollectionGraph& graph, const LouvainConfig& config) {
  config.validate();
  if (graph.node_count() < 2) {
    throw GraphTooSmallError("louvain needs at least 2 nodes");
  }

  LevelGraph level = level_from_collection(graph);
  const std::size_t n = graph.node_count();

  // node -> community on the original graph, composed across levels
  std::vector<int> flat(n);
  std::iota(flat.begin(), flat.end(), 0);

  LouvainResult result;
  result.partition.assignment = flat;

  if (level.two_m <= 0.0) {
    result.modularity = 0.0;
    return result;
  }

  Rng rng(config.seed);
  double previous_q = level_modularity(level, flat, config.resolution);
  double final_q = previous_q;

  for (int pass = 0; pass < config.max_passes; ++pass) {
    std::vector<int> comm(level.size());
    std::iota(comm.begin(), comm.end(), 0);
    const bool any_move = local_moves(level, comm, config.resolution, rng);
    const int community_count = renumber(comm);

    for (int& c : flat) {
      c = comm[static_cast<std::size_t>(c)];
    }
    const double q = level_modularity(level, comm, config.resolution);
    final_q = q;
    result.pass_modularity.push_back(q);

    if (!any_move || q - previous_q <= config.min_modularity_gain) {
      break;
    }
    previous_q = q;
    level = aggregate(level, comm, community_count);
  }

  result.partition.assignment = flat;
  result.partition.canonicalize();
  result.modularity = final_q;
  return result;
}

LouvainResult louvain_restarts(const CollectionGraph& graph, const LouvainConfig& config,
                               int restarts) {
  if (restarts <= 0) {
    throw ConfigError("restarts must be positive");
  }
  LouvainResult best;
  bool have_best = false;
  for (int r = 0; r < restarts; ++r) {
    LouvainConfig attempt = config;
    attempt.seed = r == 0 ? config.seed : seed_mix(config.seed, "restart-" + std::to_string(r));
    LouvainResult current = louvain(graph, attempt);
    if (!have_best || current.modularity > best.modularity) {
      best = std::move(current);
      have_best = true;
    }
  }
  return best;
}

namespace {

// Enumerates restricted growth strings (canonical assignments) in
// lexicographic order.
template <typename F>
void enumerate_partitions(std::vector<int>& assignment, std::size_t pos, int max_used,
                          F&& visit) {
  if (pos == assignment.size()) {
    visit(assignment);
    return;
  }
  for (int c = 0; c <= max_used + 1; ++c) {
    assignment[pos] = c;
    enumerate_partitions(assignment, pos + 1, std::max(max_used, c), visit);
  }
}

}  // namespace

BruteForceResult brute_force_best_partition(const CollectionGraph& graph, double resolution) {
  const std::size_t n = graph.node_count();
  if (n > 10) {
    throw OracleTooLargeError("brute force partition search capped at 10 nodes, got " +
                              std::to_string(n));
  }
  if (n == 0) {
    throw GraphTooSmallError("empty graph");
  }

  BruteForceResult best;
  bool have_best = false;
  std::vector<int> assignment(n, 0);
  // First node is pinned to community 0; lexicographic enumeration plus
  // strict improvement keeps the smallest assignment on ties.
  enumerate_partitions(assignment, 1, 0, [&](const std::vector<int>& candidate) {
    Partition p;
    p.assignment = candidate;
    const double q = modularity(graph, p, resolution);
    if (!have_best || q > best.modularity + 1e-15) {
      best.partition = std::move(p);
      best.modularity = q;
      have_best = true;
    }
  });
  return best;
}

void export_partition_json(const Partition& partition, double modularity_value,
                           std::ostream& out) {
  nlohmann::ordered_json j;
  j["modularity"] = modularity_value;
  nlohmann::ordered_json assignment = nlohmann::ordered_json::object();
  for (std::size_t node = 0; node < partition.assignment.size(); ++node) {
    assignment[std::to_string(node)] = partition.assignment[node];
  }
  j["assignment"] = assignment;
  j["communities"] = partition.members();
  out << j.dump(2) << '\n';
}

PartitionFile read_partition_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FileReadError("cannot open " + path.string());
  }
  nlohmann::json parsed;
  try {
    in >> parsed;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  PartitionFile file;
  try {
    file.modularity = parsed.at("modularity").get<double>();
    const auto& assignment = parsed.at("assignment");
    file.partition.assignment.resize(assignment.size(), -1);
    for (const auto& [key, value] : assignment.items()) {
      const auto node = static_cast<std::size_t>(std::stoul(key));
      if (node >= file.partition.assignment.size()) {
        throw FormatError(path.string() + ": node id " + key + " out of range");
      }
      file.partition.assignment[node] = value.get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument&) {
    throw FormatError(path.string() + ": non-integer node id");
  }
  file.partition.validate(file.partition.assignment.size());
  return file;
}

}  // namespace docstruct
