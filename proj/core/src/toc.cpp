#include "docstruct/toc.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "docstruct/errors.hpp"

namespace docstruct {

DocNodeIndex index_nodes_by_doc(const CollectionGraph& graph) {
  DocNodeIndex index;
  for (const auto& node : graph.nodes()) {
    index[node.doc_ind].push_back(node.node_id);
  }
  return index;
}

double coverage(const std::vector<std::vector<int>>& selected_communities,
                const Corpus& corpus, const DocNodeIndex& node_index) {
  (void)corpus;  // docs without segments are absent from the index and contribute 0
  std::unordered_set<int> covered;
  for (const auto& community : selected_communities) {
    covered.insert(community.begin(), community.end());
  }
  double total = 0.0;
  for (const auto& [doc_ind, nodes] : node_index) {
    if (nodes.empty()) {
      continue;
    }
    std::size_t hit = 0;
    for (int node : nodes) {
      if (covered.count(node)) {
        ++hit;
      }
    }
    total += static_cast<double>(hit) / static_cast<double>(nodes.size());
  }
  return total;
}

Selection select_topics(const Partition& partition, int k, const Corpus& corpus,
                        const DocNodeIndex& node_index) {
  (void)corpus;
  const auto communities = partition.members();
  const int total = static_cast<int>(communities.size());
  if (k < 1 || k > total) {
    throw NotEnoughCommunitiesError("requested k=" + std::to_string(k) + " topics but only " +
                                    std::to_string(total) + " communities exist");
  }

  // Per-document segment counts and node -> doc lookup for marginal gains.
  std::map<int, double> doc_size;
  std::vector<int> node_doc(partition.assignment.size(), -1);
  for (const auto& [doc_ind, nodes] : node_index) {
    doc_size[doc_ind] = static_cast<double>(nodes.size());
    for (int node : nodes) {
      node_doc[static_cast<std::size_t>(node)] = doc_ind;
    }
  }

  std::vector<bool> covered(partition.assignment.size(), false);
  std::vector<bool> selected(communities.size(), false);
  Selection result;

  for (int round = 0; round < k; ++round) {
    int best = -1;
    double best_gain = -1.0;
    std::size_t best_size = 0;
    for (int c = 0; c < total; ++c) {
      if (selected[static_cast<std::size_t>(c)]) {
        continue;
      }
      const auto& members = communities[static_cast<std::size_t>(c)];
      double gain = 0.0;
      for (int node : members) {
        if (!covered[static_cast<std::size_t>(node)]) {
          gain += 1.0 / doc_size.at(node_doc[static_cast<std::size_t>(node)]);
        }
      }
      const bool wins = gain > best_gain ||
                        (gain == best_gain && members.size() > best_size);
      if (wins) {
        best = c;
        best_gain = gain;
        best_size = members.size();
      }
    }
    selected[static_cast<std::size_t>(best)] = true;
    for (int node : communities[static_cast<std::size_t>(best)]) {
      covered[static_cast<std::size_t>(node)] = true;
    }
    result.community_ids.push_back(best);
    result.marginal_gains.push_back(best_gain);
  }
  return result;
}

int community_medoid(const std::vector<int>& members, const CollectionGraph& graph) {
  if (members.empty()) {
    throw PartitionError("medoid of an empty community");
  }
  if (members.size() == 1) {
    return members.front();
  }
  // ascending ids so ties resolve to the lowest node id
  std::vector<int> ordered = members;
  std::sort(ordered.begin(), ordered.end());
  int best = ordered.front();
  double best_sum = 0.0;
  bool first = true;
  for (int candidate : ordered) {
    double sum = 0.0;
    for (int other : ordered) {
      if (other != candidate) {
        sum += graph.weight(candidate, other);
      }
    }
    if (first || sum > best_sum) {
      best = candidate;
      best_sum = sum;
      first = false;
    }
  }
  return best;
}

Toc make_toc(const Selection& selection, const Partition& partition,
             const CollectionGraph& graph, const Corpus& corpus) {
  const auto communities = partition.members();
  const auto n_docs = static_cast<double>(corpus.size());

  Toc toc;
  toc.k = static_cast<int>(selection.community_ids.size());
  for (std::size_t i = 0; i < selection.community_ids.size(); ++i) {
    const int community_id = selection.community_ids[i];
    TocEntry entry;
    entry.topic_id = static_cast<int>(i);
    entry.community = communities.at(static_cast<std::size_t>(community_id));
    entry.medoid_node = community_medoid(entry.community, graph);
    entry.label = graph.node(entry.medoid_node).head_text;
    entry.coverage_share = n_docs > 0 ? selection.marginal_gains[i] / n_docs : 0.0;
    toc.entries.push_back(std::move(entry));
  }

  // Greedy marginal gains are non-increasing, so selection order already is
  // coverage_share descending; keep it stable.
  std::stable_sort(toc.entries.begin(), toc.entries.end(),
                   [](const TocEntry& a, const TocEntry& b) {
                     return a.coverage_share > b.coverage_share;
                   });
  return toc;
}

Grounding ground(const Toc& toc, const CollectionGraph& graph, const Corpus& corpus) {
  (void)corpus;
  std::vector<int> node_topic(graph.node_count(), -1);
  for (const auto& entry : toc.entries) {
    for (int node : entry.community) {
      node_topic[static_cast<std::size_t>(node)] = entry.topic_id;
    }
  }

  Grounding grounding;
  const auto index = index_nodes_by_doc(graph);
  for (const auto& [doc_ind, nodes] : index) {
    int previous_topic = -1;
    for (int node_id : nodes) {
      const int topic = node_topic[static_cast<std::size_t>(node_id)];
      if (topic < 0) {
        previous_topic = -1;
        continue;
      }
      const auto& node = graph.node(node_id);
      const Span span{node.head_span.begin, node.body_span.end};
      auto& spans = grounding.spans[{topic, doc_ind}];
      if (topic == previous_topic && !spans.empty() && spans.back().end == span.begin) {
        spans.back().end = span.end;
      } else {
        spans.push_back(span);
      }
      previous_topic = topic;
    }
  }
  return grounding;
}

void write_toc_json(const Toc& toc, std::ostream& out) {
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const auto& entry : toc.entries) {
    nlohmann::ordered_json j;
    j["topic_id"] = entry.topic_id;
    j["label"] = entry.label;
    j["medoid_node"] = entry.medoid_node;
    j["community_size"] = entry.community.size();
    j["coverage_share"] = entry.coverage_share;
    j["community"] = entry.community;
    entries.push_back(std::move(j));
  }
  out << entries.dump(2) << '\n';
}

Toc read_toc_json(const std::filesystem::path& path) {
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
  if (!parsed.is_array()) {
    throw FormatError(path.string() + ": expected a JSON array");
  }
  Toc toc;
  for (const auto& j : parsed) {
    TocEntry entry;
    try {
      entry.topic_id = j.at("topic_id").get<int>();
      entry.label = j.at("label").get<std::string>();
      entry.medoid_node = j.at("medoid_node").get<int>();
      entry.coverage_share = j.at("coverage_share").get<double>();
      if (j.contains("community")) {
        entry.community = j.at("community").get<std::vector<int>>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
    toc.entries.push_back(std::move(entry));
  }
  toc.k = static_cast<int>(toc.entries.size());
  return toc;
}

void write_grounding_jsonl(const Grounding& grounding, const Corpus& corpus,
                           std::ostream& out) {
  // Rows sorted by (doc_ind, topic_id); docs without labels are omitted.
  std::map<std::pair<int, int>, const std::vector<Span>*> ordered;
  for (const auto& [key, spans] : grounding.spans) {
    if (!spans.empty()) {
      ordered[{key.second, key.first}] = &spans;
    }
  }
  for (const auto& [key, spans] : ordered) {
    const auto& [doc_ind, topic_id] = key;
    nlohmann::ordered_json j;
    j["doc_id"] = corpus.docs.at(static_cast<std::size_t>(doc_ind)).doc_id;
    j["topic_id"] = topic_id;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& span : *spans) {
      arr.push_back({span.begin, span.end});
    }
    j["spans"] = arr;
    out << j.dump() << '\n';
  }
}

std::vector<GroundingRecord> read_grounding_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FileReadError("cannot open " + path.string());
  }
  std::vector<GroundingRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    GroundingRecord record;
    try {
      record.doc_id = j.at("doc_id").get<std::string>();
      const auto& topic = j.at("topic_id");
      if (topic.is_string()) {
        record.topic_is_label = true;
        record.topic_label = topic.get<std::string>();
      } else if (topic.is_number_integer()) {
        record.topic_id = topic.get<int>();
      } else {
        throw FormatError(path.string() + ":" + std::to_string(line_no) +
                          ": topic_id must be an integer or string");
      }
      for (const auto& pair : j.at("spans")) {
        if (!pair.is_array() || pair.size() != 2) {
          throw FormatError(path.string() + ":" + std::to_string(line_no) +
                            ": spans must be [start,end] pairs");
        }
        record.spans.push_back(
            {pair[0].get<std::size_t>(), pair[1].get<std::size_t>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace docstruct
