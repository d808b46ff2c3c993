#include "docstruct/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "docstruct/errors.hpp"

namespace docstruct {

namespace {

// Two-pointer subset test on canonical span lists: is a's character set
// contained in b's?
bool char_subset(const std::vector<Span>& a, const std::vector<Span>& b) {
  std::size_t j = 0;
  for (const Span& span : a) {
    while (j < b.size() && b[j].end < span.end) {
      if (b[j].begin <= span.begin && span.begin < b[j].end) {
        return false;  // span starts inside b[j] but runs past it
      }
      ++j;
    }
    if (j == b.size() || b[j].begin > span.begin || b[j].end < span.end) {
      return false;
    }
  }
  return true;
}

bool char_intersects(const std::vector<Span>& a, const std::vector<Span>& b) {
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].end <= b[j].begin) {
      ++i;
    } else if (b[j].end <= a[i].begin) {
      ++j;
    } else {
      return true;
    }
  }
  return false;
}

Scores harmonic(double precision, double recall) {
  Scores s;
  s.precision = precision;
  s.recall = recall;
  s.f1 = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  return s;
}

double safe_ratio(double numerator, double denominator) {
  return denominator > 0.0 ? numerator / denominator : 0.0;
}

}  // namespace

std::vector<Span> canonicalize_spans(std::vector<Span> spans) {
  spans.erase(std::remove_if(spans.begin(), spans.end(),
                             [](const Span& s) { return s.empty(); }),
              spans.end());
  std::sort(spans.begin(), spans.end());
  std::vector<Span> merged;
  for (const Span& span : spans) {
    if (!merged.empty() && span.begin <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, span.end);
    } else {
      merged.push_back(span);
    }
  }
  return merged;
}

MatchFlags match_flags(const std::vector<Span>& pred_raw, const std::vector<Span>& gold_raw) {
  const auto pred = canonicalize_spans(pred_raw);
  const auto gold = canonicalize_spans(gold_raw);

  MatchFlags flags;
  if (pred.empty() && gold.empty()) {
    flags.partial_precision = flags.partial_recall = true;
    flags.exact_precision = flags.exact_recall = true;
    return flags;
  }
  if (pred.empty() || gold.empty()) {
    return flags;  // total miss
  }
  const bool overlap = char_intersects(pred, gold);
  flags.partial_precision = overlap;
  flags.partial_recall = overlap;
  flags.exact_precision = char_subset(pred, gold);
  flags.exact_recall = char_subset(gold, pred);
  return flags;
}

std::vector<KeyedFlags> compute_flags(const LabeledGrounding& pred,
                                      const LabeledGrounding& gold) {
  std::set<std::pair<std::string, std::string>> keys;
  for (const auto& [key, spans] : pred) {
    if (!canonicalize_spans(spans).empty()) {
      keys.insert(key);
    }
  }
  for (const auto& [key, spans] : gold) {
    if (!canonicalize_spans(spans).empty()) {
      keys.insert(key);
    }
  }

  static const std::vector<Span> kNone;
  std::vector<KeyedFlags> out;
  out.reserve(keys.size());
  for (const auto& key : keys) {
    const auto pit = pred.find(key);
    const auto git = gold.find(key);
    const auto& p = pit != pred.end() ? pit->second : kNone;
    const auto& g = git != gold.end() ? git->second : kNone;
    KeyedFlags kf;
    kf.label = key.first;
    kf.doc_id = key.second;
    kf.pred_nonempty = !canonicalize_spans(p).empty();
    kf.gold_nonempty = !canonicalize_spans(g).empty();
    kf.flags = match_flags(p, g);
    out.push_back(std::move(kf));
  }
  return out;
}

namespace {

struct Tally {
  double partial_hits = 0, exact_hits_p = 0, exact_hits_r = 0, partial_hits_r = 0;
  double pred_keys = 0, gold_keys = 0;

  void add(const KeyedFlags& kf) {
    if (kf.pred_nonempty) {
      pred_keys += 1;
      partial_hits += kf.flags.partial_precision ? 1 : 0;
      exact_hits_p += kf.flags.exact_precision ? 1 : 0;
    }
    if (kf.gold_nonempty) {
      gold_keys += 1;
      partial_hits_r += kf.flags.partial_recall ? 1 : 0;
      exact_hits_r += kf.flags.exact_recall ? 1 : 0;
    }
  }

  ScoreBlock block() const {
    ScoreBlock b;
    b.partial = harmonic(safe_ratio(partial_hits, pred_keys), safe_ratio(partial_hits_r, gold_keys));
    b.exact = harmonic(safe_ratio(exact_hits_p, pred_keys), safe_ratio(exact_hits_r, gold_keys));
    return b;
  }
};

}  // namespace

EvalReport aggregate_scores(const std::vector<KeyedFlags>& flags) {
  if (flags.empty()) {
    throw EmptyEvaluationError("no (label, doc) keys to evaluate");
  }

  EvalReport report;

  Tally micro;
  for (const auto& kf : flags) {
    micro.add(kf);
  }
  report.micro = micro.block();

  std::map<std::string, Tally> per_label;
  for (const auto& kf : flags) {
    per_label[kf.label].add(kf);
  }
  ScoreBlock macro;
  for (const auto& [label, tally] : per_label) {
    const ScoreBlock b = tally.block();
    macro.partial.precision += b.partial.precision;
    macro.partial.recall += b.partial.recall;
    macro.partial.f1 += b.partial.f1;
    macro.exact.precision += b.exact.precision;
    macro.exact.recall += b.exact.recall;
    macro.exact.f1 += b.exact.f1;
  }
  const auto n_labels = static_cast<double>(per_label.size());
  macro.partial.precision /= n_labels;
  macro.partial.recall /= n_labels;
  macro.partial.f1 /= n_labels;
  macro.exact.precision /= n_labels;
  macro.exact.recall /= n_labels;
  macro.exact.f1 /= n_labels;
  report.macro = macro;
  return report;
}

EvalReport score_groundings(const LabeledGrounding& pred, const LabeledGrounding& gold) {
  return aggregate_scores(compute_flags(pred, gold));
}

LabeledGrounding baseline_most_frequent(const LabeledGrounding& gold) {
  if (gold.empty()) {
    throw EmptyEvaluationError("gold grounding is empty");
  }
  std::map<std::string, std::size_t> span_counts;
  for (const auto& [key, spans] : gold) {
    span_counts[key.first] += canonicalize_spans(spans).size();
  }
  std::string top_label;
  std::size_t top_count = 0;
  for (const auto& [label, count] : span_counts) {
    if (count > top_count) {  // map order makes ties lexicographically smallest
      top_label = label;
      top_count = count;
    }
  }

  LabeledGrounding pred;
  std::map<std::string, std::vector<Span>> per_doc;
  for (const auto& [key, spans] : gold) {
    auto& acc = per_doc[key.second];
    acc.insert(acc.end(), spans.begin(), spans.end());
  }
  for (auto& [doc_id, spans] : per_doc) {
    pred[{top_label, doc_id}] = canonicalize_spans(spans);
  }
  return pred;
}

EvalReport baseline_random(const LabeledGrounding& gold, std::uint64_t seed, int trials) {
  if (gold.empty()) {
    throw EmptyEvaluationError("gold grounding is empty");
  }
  if (trials < 1) {
    throw ConfigError("random baseline needs at least one trial");
  }

  std::vector<std::string> labels;
  for (const auto& [key, spans] : gold) {
    if (std::find(labels.begin(), labels.end(), key.first) == labels.end()) {
      labels.push_back(key.first);
    }
  }
  std::sort(labels.begin(), labels.end());

  struct Unit {
    std::string doc_id;
    Span span;
  };
  std::vector<Unit> units;
  for (const auto& [key, spans] : gold) {
    for (const Span& span : canonicalize_spans(spans)) {
      units.push_back({key.second, span});
    }
  }

  Rng rng(seed);
  EvalReport mean;
  auto accumulate = [](Scores& into, const Scores& from, double w) {
    into.precision += w * from.precision;
    into.recall += w * from.recall;
    into.f1 += w * from.f1;
  };

  const double w = 1.0 / static_cast<double>(trials);
  for (int trial = 0; trial < trials; ++trial) {
    LabeledGrounding pred;
    for (const auto& unit : units) {
      const std::string& label = labels[rng.below(labels.size())];
      pred[{label, unit.doc_id}].push_back(unit.span);
    }
    for (auto& [key, spans] : pred) {
      spans = canonicalize_spans(spans);
    }
    const EvalReport report = score_groundings(pred, gold);
    accumulate(mean.macro.partial, report.macro.partial, w);
    accumulate(mean.macro.exact, report.macro.exact, w);
    accumulate(mean.micro.partial, report.micro.partial, w);
    accumulate(mean.micro.exact, report.micro.exact, w);
  }
  return mean;
}

std::vector<IntrusionSample> make_intrusion_samples(const Partition& partition,
                                                    const CollectionGraph& graph, int count,
                                                    std::uint64_t seed) {
  if (count < 1) {
    throw ConfigError("sample count must be positive");
  }
  const auto communities = partition.members();
  if (communities.size() < 2) {
    throw CannotSampleError("need at least 2 communities, got " +
                            std::to_string(communities.size()));
  }

  // Distinct header texts per community, sorted for stable draws.
  std::vector<std::vector<std::string>> texts(communities.size());
  for (std::size_t c = 0; c < communities.size(); ++c) {
    std::set<std::string> uniq;
    for (int node : communities[c]) {
      uniq.insert(graph.node(node).head_text);
    }
    texts[c].assign(uniq.begin(), uniq.end());
  }

  std::vector<int> eligible;
  for (std::size_t c = 0; c < communities.size(); ++c) {
    if (texts[c].size() >= 9) {
      eligible.push_back(static_cast<int>(c));
    }
  }
  if (eligible.empty()) {
    throw CannotSampleError("no community has 9 distinct header texts");
  }

  Rng rng(seed);
  std::vector<IntrusionSample> samples;
  samples.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    const int source = eligible[rng.below(eligible.size())];

    // 9 distinct in-community headers via partial Fisher-Yates.
    std::vector<std::string> pool = texts[static_cast<std::size_t>(source)];
    std::vector<std::string> shown;
    for (int i = 0; i < 9; ++i) {
      const std::size_t j = static_cast<std::size_t>(i) + rng.below(pool.size() - i);
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
      shown.push_back(pool[static_cast<std::size_t>(i)]);
    }
    const std::set<std::string> shown_set(shown.begin(), shown.end());

    // Intruder from a different community, skipping texts already shown.
    std::vector<int> donor_candidates;
    for (std::size_t c = 0; c < communities.size(); ++c) {
      if (static_cast<int>(c) == source) {
        continue;
      }
      if (std::any_of(texts[c].begin(), texts[c].end(), [&](const std::string& t) {
            return !shown_set.count(t);
          })) {
        donor_candidates.push_back(static_cast<int>(c));
      }
    }
    if (donor_candidates.empty()) {
      throw CannotSampleError("no community can donate an unseen intruder header");
    }
    const int donor = donor_candidates[rng.below(donor_candidates.size())];
    std::vector<std::string> donor_texts;
    for (const auto& t : texts[static_cast<std::size_t>(donor)]) {
      if (!shown_set.count(t)) {
        donor_texts.push_back(t);
      }
    }
    const std::string intruder = donor_texts[rng.below(donor_texts.size())];

    IntrusionSample sample;
    sample.source_community = source;
    sample.intruder_community = donor;
    sample.shown_headers = shown;
    sample.shown_headers.push_back(intruder);
    std::vector<int> positions(10);
    for (int i = 0; i < 10; ++i) {
      positions[static_cast<std::size_t>(i)] = i;
    }
    rng.shuffle(positions);
    std::vector<std::string> shuffled(10);
    for (int i = 0; i < 10; ++i) {
      shuffled[static_cast<std::size_t>(positions[static_cast<std::size_t>(i)])] =
          sample.shown_headers[static_cast<std::size_t>(i)];
    }
    sample.shown_headers = std::move(shuffled);
    sample.intruder_position = positions[9];

    char id[16];
    std::snprintf(id, sizeof(id), "s%06d", s);
    sample.sample_id = id;
    samples.push_back(std::move(sample));
  }
  return samples;
}

IntrusionScore score_intrusion(const std::vector<IntrusionSample>& samples,
                               const std::vector<IntrusionAnnotation>& annotations) {
  std::map<std::string, const IntrusionSample*> by_id;
  for (const auto& sample : samples) {
    by_id[sample.sample_id] = &sample;
  }

  IntrusionScore score;
  std::vector<double> confidences;
  confidences.reserve(annotations.size());
  double accurate = 0.0;
  for (const auto& annotation : annotations) {
    const auto it = by_id.find(annotation.sample_id);
    if (it == by_id.end()) {
      throw AnnotationError("unknown sample_id '" + annotation.sample_id + "'");
    }
    if (annotation.marked_positions.empty()) {
      throw AnnotationError("annotation for '" + annotation.sample_id + "' marks nothing");
    }
    if (annotation.num_options < 1 ||
        static_cast<int>(annotation.marked_positions.size()) > annotation.num_options) {
      throw AnnotationError("annotation for '" + annotation.sample_id + "' marks more than " +
                            std::to_string(annotation.num_options) + " options");
    }
    const double conf =
        1.0 - (static_cast<double>(annotation.marked_positions.size()) - 1.0) /
                  static_cast<double>(annotation.num_options);
    confidences.push_back(conf);
    const auto& marked = annotation.marked_positions;
    if (std::find(marked.begin(), marked.end(), it->second->intruder_position) !=
        marked.end()) {
      accurate += 1.0;
    }
  }

  score.annotations = static_cast<int>(annotations.size());
  if (annotations.empty()) {
    return score;
  }
  const auto n = static_cast<double>(confidences.size());
  score.accuracy = accurate / n;
  double mean = 0.0;
  for (double c : confidences) {
    mean += c;
  }
  mean /= n;
  double variance = 0.0;
  for (double c : confidences) {
    variance += (c - mean) * (c - mean);
  }
  score.confidence_mean = mean;
  score.confidence_std = std::sqrt(variance / n);
  return score;
}

void write_intrusion_samples_jsonl(const std::vector<IntrusionSample>& samples,
                                   std::ostream& out) {
  for (const auto& sample : samples) {
    nlohmann::ordered_json j;
    j["sample_id"] = sample.sample_id;
    j["shown_headers"] = sample.shown_headers;
    j["intruder_position"] = sample.intruder_position;
    j["source_community"] = sample.source_community;
    j["intruder_community"] = sample.intruder_community;
    out << j.dump() << '\n';
  }
}

namespace {

nlohmann::json parse_jsonl_line(const std::filesystem::path& path, const std::string& line,
                                std::size_t line_no) {
  try {
    return nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
  }
}

}  // namespace

std::vector<IntrusionSample> read_intrusion_samples_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FileReadError("cannot open " + path.string());
  }
  std::vector<IntrusionSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    const auto j = parse_jsonl_line(path, line, line_no);
    IntrusionSample sample;
    try {
      sample.sample_id = j.at("sample_id").get<std::string>();
      sample.shown_headers = j.at("shown_headers").get<std::vector<std::string>>();
      sample.intruder_position = j.at("intruder_position").get<int>();
      sample.source_community = j.at("source_community").get<int>();
      sample.intruder_community = j.at("intruder_community").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

std::vector<IntrusionAnnotation> read_intrusion_annotations_jsonl(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FileReadError("cannot open " + path.string());
  }
  std::vector<IntrusionAnnotation> annotations;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) {
      continue;
    }
    const auto j = parse_jsonl_line(path, line, line_no);
    IntrusionAnnotation annotation;
    try {
      annotation.sample_id = j.at("sample_id").get<std::string>();
      annotation.marked_positions = j.at("marked_positions").get<std::vector<int>>();
      annotation.num_options = j.value("num_options", 10);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    annotations.push_back(std::move(annotation));
  }
  return annotations;
}

namespace {

nlohmann::ordered_json scores_json(const Scores& scores) {
  nlohmann::ordered_json j;
  j["precision"] = scores.precision;
  j["recall"] = scores.recall;
  j["f1"] = scores.f1;
  return j;
}

nlohmann::ordered_json report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["macro"]["partial"] = scores_json(report.macro.partial);
  j["macro"]["exact"] = scores_json(report.macro.exact);
  j["micro"]["partial"] = scores_json(report.micro.partial);
  j["micro"]["exact"] = scores_json(report.micro.exact);
  return j;
}

}  // namespace

void write_eval_report_json(const EvalReport& ours, const EvalReport& most_frequent,
                            const EvalReport& random, int random_trials, std::ostream& out) {
  nlohmann::ordered_json j;
  j["ours"] = report_json(ours);
  j["most_frequent_class"] = report_json(most_frequent);
  j["random"] = report_json(random);
  j["random_trials"] = random_trials;
  out << j.dump(2) << '\n';
}

}  // namespace docstruct
