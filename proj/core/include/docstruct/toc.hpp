#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "docstruct/communities.hpp"
#include "docstruct/corpus.hpp"
#include "docstruct/graph.hpp"

namespace docstruct {

// doc_ind -> node ids in that document, ascending (textual order).
using DocNodeIndex = std::map<int, std::vector<int>>;

DocNodeIndex index_nodes_by_doc(const CollectionGraph& graph);

// Sum over documents of the fraction of their segments covered by the
// selected communities. Documents with no segments contribute 0.
double coverage(const std::vector<std::vector<int>>& selected_communities,
                const Corpus& corpus, const DocNodeIndex& node_index);

struct Selection {
  std::vector<int> community_ids;      // in selection order
  std::vector<double> marginal_gains;  // coverage gain at each pick
};

// Greedy coverage maximization over the partition's communities. Ties go to
// the larger community, then the lower community id.
Selection select_topics(const Partition& partition, int k, const Corpus& corpus,
                        const DocNodeIndex& node_index);

// Member with the largest total edge weight to the rest of the community;
// ties go to the lowest node id.
int community_medoid(const std::vector<int>& members, const CollectionGraph& graph);

struct TocEntry {
  int topic_id = 0;
  std::string label;  // medoid header text
  int medoid_node = 0;
  std::vector<int> community;  // ascending node ids
  double coverage_share = 0.0;
};

struct Toc {
  std::vector<TocEntry> entries;  // coverage_share descending
  int k = 0;
};

Toc make_toc(const Selection& selection, const Partition& partition,
             const CollectionGraph& graph, const Corpus& corpus);

// (topic_id, doc_ind) -> disjoint ordered character spans.
struct Grounding {
  std::map<std::pair<int, int>, std::vector<Span>> spans;
};

// Maps every segment of a selected community to its (header start, body
// end) span; adjacent same-topic spans merge. Unselected segments stay
// unlabeled.
Grounding ground(const Toc& toc, const CollectionGraph& graph, const Corpus& corpus);

void write_toc_json(const Toc& toc, std::ostream& out);
Toc read_toc_json(const std::filesystem::path& path);

void write_grounding_jsonl(const Grounding& grounding, const Corpus& corpus,
                           std::ostream& out);

// A grounding file row; topic is an id for predictions and a label string
// for gold files.
struct GroundingRecord {
  std::string doc_id;
  bool topic_is_label = false;
  int topic_id = 0;
  std::string topic_label;
  std::vector<Span> spans;
};

std::vector<GroundingRecord> read_grounding_jsonl(const std::filesystem::path& path);

}  // namespace docstruct
