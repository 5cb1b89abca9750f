#include "ragjack/synth.hpp"

#include <random>
#include <set>
#include <sstream>

#include "jsonl.hpp"
#include "ragjack/datasets.hpp"
#include "ragjack/error.hpp"

namespace ragjack {

namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

/// Portable bounded draw; std distributions differ between standard libraries.
std::size_t below(std::mt19937_64& gen, std::size_t n) { return static_cast<std::size_t>(gen() % n); }

template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& gen) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(gen, i)]);
}

class WordFactory {
 public:
  WordFactory(std::mt19937_64& gen, std::set<std::string> reserved)
      : gen_(gen), used_(std::move(reserved)) {}

  std::string make(std::size_t syllables) {
    for (;;) {
      std::string w;
      for (std::size_t s = 0; s < syllables; ++s) {
        w.push_back(kConsonants[below(gen_, kConsonants.size())]);
        w.push_back(kVowels[below(gen_, kVowels.size())]);
      }
      if (used_.insert(w).second) return w;
    }
  }

 private:
  std::mt19937_64& gen_;
  std::set<std::string> used_;
};

/// k distinct picks from `from`, in draw order.
std::vector<std::string> sample(const std::vector<std::string>& from, std::size_t k,
                                std::mt19937_64& gen) {
  std::vector<std::size_t> idx(from.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k && i < idx.size(); ++i) {
    std::swap(idx[i], idx[i + below(gen, idx.size() - i)]);
    out.push_back(from[idx[i]]);
  }
  return out;
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

std::string pad_id(const char* prefix, std::size_t i, std::size_t total) {
  const std::size_t width = std::max<std::size_t>(3, std::to_string(total ? total - 1 : 0).size());
  std::string n = std::to_string(i);
  return prefix + std::string(width > n.size() ? width - n.size() : 0, '0') + n;
}

}  // namespace

void SynthConfig::validate() const {
  if (topic_words == 0) throw ConfigError("synth topic_words must be >= 1");
  if (background_words == 0) throw ConfigError("synth background_words must be >= 1");
  if (min_doc_len > max_doc_len) throw ConfigError("synth min_doc_len > max_doc_len");
  if (min_shared > max_shared || max_shared > topic_words) {
    throw ConfigError("synth shared-word range must satisfy min <= max <= topic_words");
  }
  if (max_shared + 1 > min_doc_len) throw ConfigError("synth documents too short for shared words");
  if (synonyms_per_topic > topic_words) throw ConfigError("synth synonyms_per_topic > topic_words");
}

SynthDataset generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 gen(cfg.seed);

  // Words that occur in the bundled resources stay out of the generated vocabulary.
  std::set<std::string> reserved;
  for (const auto& h : bundled_hijack_pool()) {
    for (auto& w : split_words(h.template_text)) reserved.insert(w);
  }
  for (const auto& i : bundled_instructions()) {
    for (auto& w : split_words(i.template_text)) reserved.insert(w);
  }
  for (auto& w : split_words(kBaselineHijack)) reserved.insert(w);
  for (auto& w : split_words("when the topic of is mentioned")) reserved.insert(w);
  WordFactory words(gen, reserved);

  const std::size_t n_topics = cfg.n_queries + cfg.n_non_target;
  std::vector<std::vector<std::string>> topics(n_topics);
  for (auto& t : topics) {
    for (std::size_t w = 0; w < cfg.topic_words; ++w) t.push_back(words.make(3));
  }
  std::vector<std::string> background;
  for (std::size_t w = 0; w < cfg.background_words; ++w) background.push_back(words.make(3));
  std::vector<std::string> answers;
  for (std::size_t t = 0; t < n_topics; ++t) answers.push_back(words.make(4));

  SynthDataset data;
  data.word_count = n_topics * cfg.topic_words + background.size() + answers.size();

  auto make_doc = [&](std::size_t topic, bool gold) {
    const std::size_t shared = cfg.min_shared + below(gen, cfg.max_shared - cfg.min_shared + 1);
    const std::size_t len = cfg.min_doc_len + below(gen, cfg.max_doc_len - cfg.min_doc_len + 1);
    std::vector<std::string> doc = sample(topics[topic], shared, gen);
    const std::size_t filler = len - shared - (gold ? 1 : 0);
    for (std::size_t f = 0; f < filler; ++f) doc.push_back(background[below(gen, background.size())]);
    if (gold) doc.push_back(answers[topic]);
    shuffle(doc, gen);
    return join(doc);
  };

  // Gold passages first (target topics, then non-target), then related
  // passages cycling over all topics until n_docs is reached.
  std::vector<std::string> texts;
  for (std::size_t t = 0; t < n_topics && texts.size() < cfg.n_docs; ++t) {
    texts.push_back(make_doc(t, true));
  }
  for (std::size_t i = 0; texts.size() < cfg.n_docs; ++i) {
    texts.push_back(make_doc(n_topics ? i % n_topics : 0, false));
  }
  if (n_topics == 0) {
    for (auto& text : texts) {
      std::vector<std::string> doc;
      for (std::size_t f = 0; f < cfg.min_doc_len; ++f) {
        doc.push_back(background[below(gen, background.size())]);
      }
      text = join(doc);
    }
  }
  shuffle(texts, gen);
  std::vector<Document> docs;
  docs.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    docs.push_back(Document{pad_id("d", i, texts.size()), std::move(texts[i]), Provenance::clean,
                            std::nullopt, std::nullopt});
  }
  data.corpus = CorpusStore(std::move(docs));

  for (std::size_t t = 0; t < n_topics; ++t) {
    const bool target = t < cfg.n_queries;
    TargetQuery q;
    q.id = target ? pad_id("q", t, cfg.n_queries) : pad_id("nt", t - cfg.n_queries, cfg.n_non_target);
    q.question = join(topics[t]) + "?";
    q.desired_answer = cfg.desired_answer;
    q.ground_truth = answers[t];
    (target ? data.targets : data.non_targets).push_back(std::move(q));
    for (const auto& w : sample(topics[t], cfg.synonyms_per_topic, gen)) {
      data.synonyms.emplace(w, background[below(gen, background.size())]);
    }
  }

  const auto hijacks = bundled_hijack_pool();
  for (std::size_t i = 0; i < cfg.offtopic_pool_size; ++i) {
    const HijackText& base = hijacks[i % hijacks.size()];
    if (base.token_length > 16) continue;
    const std::string pad = join(sample(background, 3, gen));
    data.offtopic_pool.push_back(make_hijack_text(pad_id("off", i, cfg.offtopic_pool_size),
                                                  pad + " " + base.template_text));
  }
  return data;
}

void write_synthetic(const SynthDataset& data, const std::filesystem::path& dir,
                     const SynthConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  data.corpus.persist(dir / "corpus.jsonl");
  detail::write_file(dir / "queries.jsonl", queries_to_jsonl(data.targets));
  detail::write_file(dir / "non_target_queries.jsonl", queries_to_jsonl(data.non_targets));
  detail::write_file(dir / "synonyms.tsv", format_synonym_table(data.synonyms));
  detail::write_file(dir / "offtopic_pool.jsonl", hijack_pool_to_jsonl(data.offtopic_pool));
  const auto pool = bundled_hijack_pool();
  detail::write_file(dir / "hijack_pool.jsonl", hijack_pool_to_jsonl(pool));
  const auto instructions = bundled_instructions();
  detail::write_file(dir / "instructions.jsonl", instructions_to_jsonl(instructions));

  std::ostringstream ini;
  ini << "# synthetic experiment (seed " << cfg.seed << ")\n"
      << "[data]\n"
      << "corpus = corpus.jsonl\n"
      << "queries = queries.jsonl\n"
      << "non_target_queries = non_target_queries.jsonl\n"
      << "pool = hijack_pool.jsonl\n"
      << "instructions = instructions.jsonl\n"
      << "instruction_id = content_manipulation\n"
      << "synonyms = synonyms.tsv\n\n"
      << "[encoder]\nseed = 1\ndim = 768\nsimilarity = dot\n\n"
      << "[retrieval]\nk = 5\n\n"
      << "[attack]\nsetting = black_box\nn_a = 5\n\n"
      << "[generator]\nkind = oracle\nprecedence = hijack_wins\n\n"
      << "[run]\nout = runs/default\nseed = " << cfg.seed << "\n";
  detail::write_file(dir / "experiment.ini", ini.str());
}

}  // namespace ragjack
