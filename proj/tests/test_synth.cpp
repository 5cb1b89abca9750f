#include <gtest/gtest.h>

#include <set>

#include "ragjack/error.hpp"
#include "ragjack/generation.hpp"
#include "ragjack/synth.hpp"
#include "test_util.hpp"

using namespace ragjack;

TEST(Synth, DefaultShape) {
  const auto d = generate_synthetic({});
  EXPECT_EQ(d.corpus.size(), 1000u);
  EXPECT_EQ(d.corpus.malicious_count(), 0u);
  EXPECT_EQ(d.targets.size(), 100u);
  EXPECT_EQ(d.non_targets.size(), 100u);
  EXPECT_EQ(d.word_count, 2000u);
  EXPECT_EQ(d.offtopic_pool.size(), 20u);
}

TEST(Synth, EveryQueryHasAGoldPassageSharingThreeWords) {
  const auto d = generate_synthetic({});
  auto check = [&](const TargetQuery& q) {
    ASSERT_TRUE(q.ground_truth.has_value());
    const auto qw = split_words(q.question);
    const std::set<std::string> qset(qw.begin(), qw.end());
    std::size_t golds = 0;
    for (const auto& doc : d.corpus) {
      if (!contains_case_insensitive(doc.text, *q.ground_truth)) continue;
      ++golds;
      std::size_t shared = 0;
      const auto dw = split_words(doc.text);
      for (const auto& w : std::set<std::string>(dw.begin(), dw.end())) shared += qset.count(w);
      EXPECT_GE(shared, 3u) << q.id;
    }
    EXPECT_EQ(golds, 1u) << q.id;
  };
  for (const auto& q : d.targets) check(q);
  for (const auto& q : d.non_targets) check(q);
}

TEST(Synth, TargetAndNonTargetVocabulariesDisjoint) {
  const auto d = generate_synthetic({});
  std::set<std::string> target_words;
  for (const auto& q : d.targets)
    for (const auto& w : split_words(q.question)) target_words.insert(w);
  for (const auto& q : d.non_targets)
    for (const auto& w : split_words(q.question)) EXPECT_EQ(target_words.count(w), 0u) << w;
}

TEST(Synth, SeedDeterminesFiles) {
  testutil::TempDir a, b, c;
  SynthConfig cfg;
  cfg.n_docs = 200;
  cfg.n_queries = 10;
  cfg.n_non_target = 10;
  write_synthetic(generate_synthetic(cfg), a.path(), cfg);
  write_synthetic(generate_synthetic(cfg), b.path(), cfg);
  cfg.seed = 1;
  write_synthetic(generate_synthetic(cfg), c.path(), cfg);
  for (const char* f : {"corpus.jsonl", "queries.jsonl", "non_target_queries.jsonl", "synonyms.tsv",
                        "offtopic_pool.jsonl", "hijack_pool.jsonl", "instructions.jsonl", "experiment.ini"}) {
    EXPECT_EQ(testutil::read_text(a / f), testutil::read_text(b / f)) << f;
  }
  EXPECT_NE(testutil::read_text(a / "corpus.jsonl"), testutil::read_text(c / "corpus.jsonl"));
}

TEST(Synth, ZeroDocsGivesEmptyCorpusFile) {
  testutil::TempDir dir;
  SynthConfig cfg;
  cfg.n_docs = 0;
  write_synthetic(generate_synthetic(cfg), dir.path(), cfg);
  EXPECT_EQ(testutil::read_text(dir / "corpus.jsonl"), "");
}

TEST(Synth, SynonymTableTargetsQueryWords) {
  const auto d = generate_synthetic({});
  std::set<std::string> qwords;
  for (const auto& q : d.targets)
    for (const auto& w : split_words(q.question)) qwords.insert(w);
  std::size_t hits = 0;
  for (const auto& [k, v] : d.synonyms) {
    hits += qwords.count(k);
    EXPECT_EQ(d.synonyms.count(v), 0u);
  }
  EXPECT_GT(hits, 0u);
}

TEST(Synth, InvalidConfig) {
  SynthConfig cfg;
  cfg.min_doc_len = 30;
  EXPECT_THROW(generate_synthetic(cfg), ConfigError);
}
