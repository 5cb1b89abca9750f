#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "ragjack/datasets.hpp"
#include "ragjack/defense.hpp"
#include "ragjack/encoder.hpp"
#include "ragjack/error.hpp"
#include "test_util.hpp"

using namespace ragjack;

TEST(Paraphrase, IdentityUnchanged) {
  const auto p = Paraphraser::identity();
  EXPECT_EQ(p.paraphrase("who wrote hamlet"), "who wrote hamlet");
  EXPECT_EQ(p.paraphrase("  Odd,  SPACING?! "), "  Odd,  SPACING?! ");
  EXPECT_TRUE(p.is_idempotent());
}

TEST(Paraphrase, TableExample) {
  const auto p = Paraphraser::synonym_table({{"wrote", "authored"}});
  EXPECT_EQ(p.paraphrase("who wrote hamlet"), "who authored hamlet");
}

TEST(Paraphrase, KeepsPunctuationAndUnknownWords) {
  const auto p = Paraphraser::synonym_table({{"wrote", "authored"}, {"play", "drama"}});
  EXPECT_EQ(p.paraphrase("Who WROTE the play, 'Hamlet'?"), "Who authored the drama, 'Hamlet'?");
  EXPECT_EQ(p.paraphrase("playwright"), "playwright");
}

TEST(Paraphrase, TableInvariants) {
  EXPECT_THROW(Paraphraser::synonym_table({{"a", "a"}}), ValidationError);
  EXPECT_THROW(Paraphraser::synonym_table({{"two words", "x"}}), ValidationError);
  EXPECT_FALSE(Paraphraser::synonym_table({{"a", "b"}, {"b", "c"}}).is_idempotent());
}

TEST(Paraphrase, BundledTableIsIdempotent) {
  const auto p = Paraphraser::synonym_table(bundled_synonyms());
  ASSERT_TRUE(p.is_idempotent());
  std::string all;
  for (const auto& [k, v] : p.table()) all += k + " " + v + " ";
  const auto once = p.paraphrase(all);
  EXPECT_EQ(p.paraphrase(once), once);
  for (const auto& [k, v] : p.table()) EXPECT_EQ(p.paraphrase(k), v);
}

TEST(Paraphrase, PermutationLeavesPooledEmbeddingUnchanged) {
  std::mt19937_64 gen(8);
  auto vocab = std::make_shared<const Vocabulary>(Vocabulary::from_tokens({"who", "wrote", "hamlet", "play"}));
  auto enc = std::make_shared<const DualEncoder>(vocab->size(), EncoderParams{16, 4, 0.0});
  const TextEncoder text(vocab, enc, SimilarityKind::dot);
  std::vector<std::string> words{"who", "wrote", "the", "play", "hamlet"};
  const Vector base = text.embed_query("who wrote the play hamlet");
  for (int i = 0; i < 10; ++i) {
    std::shuffle(words.begin(), words.end(), gen);
    std::string q;
    for (const auto& w : words) q += w + " ";
    const Vector v = text.embed_query(q);
    for (std::size_t c = 0; c < v.size(); ++c) EXPECT_NEAR(v[c], base[c], 1e-12);
  }
}

TEST(SynonymFile, ParseSkipsCommentsAndReportsLine) {
  std::istringstream good("# comment\nwrote\tauthored\n\nplay\tdrama\n");
  const auto t = parse_synonym_table(good, "syn");
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.at("play"), "drama");
  std::istringstream bad("wrote\tauthored\nno tab here\n");
  try {
    parse_synonym_table(bad, "syn");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream dup("a\tb\na\tc\n");
  EXPECT_THROW(parse_synonym_table(dup, "syn"), ParseError);
}

TEST(SynonymFile, FormatRoundTrips) {
  testutil::TempDir dir;
  const auto table = bundled_synonyms();
  testutil::write_text(dir / "s.tsv", format_synonym_table(table));
  EXPECT_EQ(load_synonym_table(dir / "s.tsv"), table);
  EXPECT_THROW(load_synonym_table(dir / "missing.tsv"), IoError);
}
