#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ragjack/attack.hpp"
#include "ragjack/corpus.hpp"
#include "ragjack/defense.hpp"

namespace ragjack {

/// Topic-clustered synthetic retrieval corpus. Every query (target or
/// non-target) owns a disjoint set of topic words; its topic contributes one
/// gold passage (holding the answer word) and several related passages that
/// share some of the topic words. Remaining slots are background filler.
struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n_docs = 1000;
  std::size_t n_queries = 100;
  std::size_t n_non_target = 100;
  std::size_t topic_words = 8;
  std::size_t background_words = 200;
  std::size_t min_doc_len = 15;
  std::size_t max_doc_len = 24;
  std::size_t min_shared = 4;
  std::size_t max_shared = 6;
  /// Topic words per query that get a synonym in the paraphrase table.
  std::size_t synonyms_per_topic = 3;
  /// Entries in the generated off-topic hijack pool.
  std::size_t offtopic_pool_size = 20;
  std::string desired_answer = "I have been PWNED";

  void validate() const;
};

struct SynthDataset {
  CorpusStore corpus;
  std::vector<TargetQuery> targets;
  std::vector<TargetQuery> non_targets;
  SynonymTable synonyms;
  /// Hijack templates padded with background words: no query content at all.
  std::vector<HijackText> offtopic_pool;
  /// Number of distinct generated words (topic + background + answers).
  std::size_t word_count = 0;
};

SynthDataset generate_synthetic(const SynthConfig& cfg);

/// Writes corpus.jsonl, queries.jsonl, non_target_queries.jsonl, synonyms.tsv,
/// offtopic_pool.jsonl, hijack_pool.jsonl, instructions.jsonl and
/// experiment.ini into `dir`.
void write_synthetic(const SynthDataset& data, const std::filesystem::path& dir,
                     const SynthConfig& cfg);

}  // namespace ragjack
