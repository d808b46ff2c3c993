#include "docstruct/synthgen.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "docstruct/corpus.hpp"
#include "docstruct/errors.hpp"

namespace docstruct {

namespace {

constexpr int kConsonantCount = 15;
const char* kConsonants = "bcdfgklmnprstvz";
const char* kVowels = "aeiou";
constexpr int kPairCount = kConsonantCount * kConsonantCount;

// Draws words over a private set of consonant pairs (syllable = CCV), so
// texts from different pools share almost no character n-grams. That keeps
// topics separable under the hashing embedder regardless of body length.
struct WordPool {
  std::vector<int> pairs;

  std::string word(Rng& rng, std::size_t syllables) const {
    std::string w;
    for (std::size_t i = 0; i < syllables; ++i) {
      const int pair = pairs[rng.below(pairs.size())];
      w.push_back(kConsonants[pair / kConsonantCount]);
      w.push_back(kConsonants[pair % kConsonantCount]);
      w.push_back(kVowels[rng.below(5)]);
    }
    return w;
  }
};

// Disjoint pools per topic plus a leftover pool for distractor headers.
std::vector<WordPool> make_topic_pools(int n_topics, std::uint64_t seed) {
  if (n_topics > 40) {
    throw SynthSpecError("default dictionary supports at most 40 topics");
  }
  std::vector<int> ids(kPairCount);
  std::iota(ids.begin(), ids.end(), 0);
  Rng rng(seed_mix(seed, "syllable-pools"));
  rng.shuffle(ids);

  const int reserve = std::min(40, kPairCount - n_topics * 4);
  const int per_topic = (kPairCount - reserve) / n_topics;
  std::vector<WordPool> pools(static_cast<std::size_t>(n_topics) + 1);
  int cursor = 0;
  for (int t = 0; t < n_topics; ++t) {
    pools[static_cast<std::size_t>(t)].pairs.assign(ids.begin() + cursor,
                                                    ids.begin() + cursor + per_topic);
    cursor += per_topic;
  }
  pools.back().pairs.assign(ids.begin() + cursor, ids.end());  // distractor pool
  return pools;
}

std::string title_case(std::string word) {
  if (!word.empty() && word[0] >= 'a' && word[0] <= 'z') {
    word[0] = static_cast<char>(word[0] - 'a' + 'A');
  }
  return word;
}

std::set<std::string> trigrams(std::string_view text) {
  const std::string folded = ascii_lower(text);
  std::set<std::string> grams;
  if (folded.size() < 3) {
    grams.insert(folded);
    return grams;
  }
  for (std::size_t i = 0; i + 3 <= folded.size(); ++i) {
    grams.insert(folded.substr(i, 3));
  }
  return grams;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) {
    return 1.0;
  }
  std::size_t intersection = 0;
  for (const auto& gram : a) {
    if (b.count(gram)) {
      ++intersection;
    }
  }
  const std::size_t uni = a.size() + b.size() - intersection;
  return uni == 0 ? 0.0 : static_cast<double>(intersection) / static_cast<double>(uni);
}

double min_within_jaccard(const std::vector<std::string>& paraphrases) {
  double lowest = 1.0;
  for (std::size_t i = 0; i < paraphrases.size(); ++i) {
    for (std::size_t j = i + 1; j < paraphrases.size(); ++j) {
      lowest = std::min(lowest, trigram_jaccard(paraphrases[i], paraphrases[j]));
    }
  }
  return lowest;
}

double max_cross_jaccard(const std::vector<std::string>& a,
                         const std::vector<std::string>& b) {
  double highest = 0.0;
  for (const auto& x : a) {
    for (const auto& y : b) {
      highest = std::max(highest, trigram_jaccard(x, y));
    }
  }
  return highest;
}

}  // namespace

double trigram_jaccard(std::string_view a, std::string_view b) {
  return jaccard(trigrams(a), trigrams(b));
}

void SynthSpec::validate() const {
  if (n_docs < 1) {
    throw SynthSpecError("n_docs must be positive");
  }
  if (n_topics < 2) {
    throw SynthSpecError("n_topics must be at least 2");
  }
  if (paraphrases_per_topic < 1) {
    throw SynthSpecError("paraphrases_per_topic must be positive");
  }
  if (distractor_rate < 0.0 || distractor_rate >= 1.0) {
    throw SynthSpecError("distractor_rate must be in [0,1)");
  }
  if (omit_rate < 0.0 || omit_rate >= 1.0) {
    throw SynthSpecError("omit_rate must be in [0,1)");
  }
  if (order_jitter < 0) {
    throw SynthSpecError("order_jitter must be non-negative");
  }
  if (body_sentences_min < 1 || body_sentences_max < body_sentences_min) {
    throw SynthSpecError("bad body_sentences range");
  }
  if (!paraphrase_dictionary.empty()) {
    for (int t = 0; t < n_topics; ++t) {
      const auto it = paraphrase_dictionary.find(t);
      if (it == paraphrase_dictionary.end() || it->second.empty()) {
        throw SynthSpecError("paraphrase_dictionary missing topic " + std::to_string(t));
      }
    }
  }
}

std::map<int, std::vector<std::string>> default_paraphrase_dictionary(int n_topics,
                                                                      int per_topic,
                                                                      std::uint64_t seed) {
  const auto pools = make_topic_pools(n_topics, seed);
  Rng rng(seed_mix(seed, "paraphrase-dict"));
  std::map<int, std::vector<std::string>> dictionary;
  std::vector<std::vector<std::string>> accepted;

  for (int t = 0; t < n_topics; ++t) {
    const WordPool& pool = pools[static_cast<std::size_t>(t)];
    std::vector<std::string> paraphrases;
    for (int attempt = 0; attempt < 200; ++attempt) {
      const std::string core =
          title_case(pool.word(rng, 4)) + " " + title_case(pool.word(rng, 4));
      paraphrases.clear();
      paraphrases.push_back(core);
      for (int p = 1; p < per_topic; ++p) {
        const std::string extra = title_case(pool.word(rng, 1 + p % 2));
        if (p % 2 == 1) {
          paraphrases.push_back(core + " " + extra);
        } else {
          paraphrases.push_back(extra + " " + core);
        }
      }
      const bool within_ok = per_topic == 1 || min_within_jaccard(paraphrases) >= 0.5;
      bool cross_ok = true;
      for (const auto& other : accepted) {
        if (max_cross_jaccard(paraphrases, other) >= 0.1) {
          cross_ok = false;
          break;
        }
      }
      if (within_ok && cross_ok) {
        break;
      }
      paraphrases.clear();
    }
    if (paraphrases.empty()) {
      throw SynthSpecError("could not build a separable paraphrase list for topic " +
                           std::to_string(t));
    }
    accepted.push_back(paraphrases);
    dictionary[t] = std::move(paraphrases);
  }
  return dictionary;
}

SynthCollection generate_collection(const SynthSpec& spec) {
  spec.validate();

  SynthCollection collection;
  collection.paraphrases =
      spec.paraphrase_dictionary.empty()
          ? default_paraphrase_dictionary(spec.n_topics, spec.paraphrases_per_topic, spec.seed)
          : spec.paraphrase_dictionary;
  for (int t = 0; t < spec.n_topics; ++t) {
    collection.gold_labels.push_back(collection.paraphrases.at(t).front());
  }

  // Per-topic body vocabulary from the same disjoint pools as the headers:
  // bodies of one topic share words, bodies of different topics share almost
  // no n-grams.
  const auto pools = make_topic_pools(spec.n_topics, spec.seed);
  std::vector<std::vector<std::string>> body_vocab(static_cast<std::size_t>(spec.n_topics));
  for (int t = 0; t < spec.n_topics; ++t) {
    Rng vocab_rng(seed_mix(spec.seed, "body-vocab-" + std::to_string(t)));
    for (int w = 0; w < 9; ++w) {
      body_vocab[static_cast<std::size_t>(t)].push_back(
          pools[static_cast<std::size_t>(t)].word(vocab_rng, 2 + vocab_rng.below(2)));
    }
  }
  // Distractor words draw from the full syllable space so distractors stay
  // dissimilar to each other and never gel into a coherent community.
  WordPool distractor_pool;
  distractor_pool.pairs.resize(kPairCount);
  std::iota(distractor_pool.pairs.begin(), distractor_pool.pairs.end(), 0);

  int digits = 1;
  for (int v = spec.n_docs - 1; v >= 10; v /= 10) {
    ++digits;
  }
  digits = std::clamp(digits, 3, 9);

  std::set<std::string> used_distractors;

  for (int d = 0; d < spec.n_docs; ++d) {
    Rng rng(seed_mix(spec.seed, "doc-" + std::to_string(d)));

    std::vector<int> order(static_cast<std::size_t>(spec.n_topics));
    std::iota(order.begin(), order.end(), 0);
    const std::uint64_t swaps = rng.below(static_cast<std::uint64_t>(spec.order_jitter) + 1);
    for (std::uint64_t s = 0; s < swaps; ++s) {
      const std::size_t at = rng.below(order.size() - 1);
      std::swap(order[at], order[at + 1]);
    }

    struct Section {
      int topic;  // -1 for distractors
      std::string header;
      std::vector<std::string> sentences;
    };
    std::vector<Section> sections;

    auto make_sentence = [&](const std::vector<std::string>& vocab) {
      const std::size_t words = 13 + rng.below(6);
      std::string sentence;
      for (std::size_t w = 0; w < words; ++w) {
        if (w > 0) {
          sentence.push_back(' ');
        }
        sentence += vocab[rng.below(vocab.size())];
      }
      sentence.push_back('.');
      return sentence;
    };

    for (int topic : order) {
      if (rng.unit() < spec.omit_rate) {
        continue;
      }
      Section section;
      section.topic = topic;
      const auto& paraphrases = collection.paraphrases.at(topic);
      section.header = paraphrases[rng.below(paraphrases.size())];
      const std::size_t n_sentences =
          static_cast<std::size_t>(spec.body_sentences_min) +
          rng.below(static_cast<std::uint64_t>(spec.body_sentences_max -
                                               spec.body_sentences_min) +
                    1);
      for (std::size_t s = 0; s < n_sentences; ++s) {
        section.sentences.push_back(make_sentence(body_vocab[static_cast<std::size_t>(topic)]));
      }
      sections.push_back(std::move(section));

      if (rng.unit() < spec.distractor_rate) {
        Section distractor;
        distractor.topic = -1;
        do {
          distractor.header =
              title_case(distractor_pool.word(rng, 3)) + " " +
              title_case(distractor_pool.word(rng, 3));
        } while (!used_distractors.insert(distractor.header).second);
        std::vector<std::string> vocab;
        for (int w = 0; w < 10; ++w) {
          vocab.push_back(distractor_pool.word(rng, 2 + rng.below(2)));
        }
        const std::size_t n_sentences = 1 + rng.below(2);
        for (std::size_t s = 0; s < n_sentences; ++s) {
          distractor.sentences.push_back(make_sentence(vocab));
        }
        sections.push_back(std::move(distractor));
      }
    }

    // Render: blocks separated by one blank line, trailing newline, no
    // trailing spaces. Already in normalized form, so offsets written here
    // match what the corpus loader sees.
    std::string content;
    std::vector<std::pair<int, Span>> topic_spans;  // topic -> section extent
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < sections.size(); ++i) {
      if (i > 0) {
        content.push_back('\n');
      }
      starts.push_back(utf8::count(content));
      content += sections[i].header;
      content.push_back('\n');
      for (const auto& sentence : sections[i].sentences) {
        content += sentence;
        content.push_back('\n');
      }
    }
    const std::size_t total_cp = utf8::count(content);
    for (std::size_t i = 0; i < sections.size(); ++i) {
      if (sections[i].topic < 0) {
        continue;
      }
      const std::size_t end = (i + 1 < sections.size()) ? starts[i + 1] : total_cp;
      topic_spans.emplace_back(sections[i].topic, Span{starts[i], end});
    }

    char name[32];
    std::snprintf(name, sizeof(name), "doc_%0*d", digits, d);
    const std::string doc_id = name;
    collection.files.emplace_back(doc_id + ".txt", content);

    std::map<int, std::vector<Span>> per_topic;
    for (const auto& [topic, span] : topic_spans) {
      per_topic[topic].push_back(span);
    }
    for (const auto& [topic, spans] : per_topic) {
      GoldSpanRecord record;
      record.doc_id = doc_id;
      record.label = collection.gold_labels[static_cast<std::size_t>(topic)];
      record.spans = spans;
      collection.gold_grounding.push_back(std::move(record));
    }
  }
  return collection;
}

void write_collection(const SynthCollection& collection,
                      const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "corpus");
  for (const auto& [filename, content] : collection.files) {
    std::ofstream out(out_dir / "corpus" / filename, std::ios::binary);
    if (!out) {
      throw FileReadError("cannot write " + (out_dir / "corpus" / filename).string());
    }
    out << content;
  }

  {
    nlohmann::ordered_json toc = nlohmann::ordered_json::array();
    for (std::size_t t = 0; t < collection.gold_labels.size(); ++t) {
      nlohmann::ordered_json entry;
      entry["topic_id"] = t;
      entry["label"] = collection.gold_labels[t];
      entry["paraphrases"] = collection.paraphrases.at(static_cast<int>(t));
      toc.push_back(std::move(entry));
    }
    std::ofstream out(out_dir / "gold_toc.json", std::ios::binary);
    out << toc.dump(2) << '\n';
  }

  {
    std::ofstream out(out_dir / "gold_grounding.jsonl", std::ios::binary);
    for (const auto& record : collection.gold_grounding) {
      nlohmann::ordered_json j;
      j["doc_id"] = record.doc_id;
      j["topic_id"] = record.label;
      nlohmann::ordered_json spans = nlohmann::ordered_json::array();
      for (const auto& span : record.spans) {
        spans.push_back({span.begin, span.end});
      }
      j["spans"] = spans;
      out << j.dump() << '\n';
    }
  }
}

}  // namespace docstruct
