#include <gtest/gtest.h>

#include <sstream>

#include "ragjack/corpus.hpp"
#include "ragjack/error.hpp"
#include "ragjack/hash.hpp"
#include "test_util.hpp"

using namespace ragjack;

namespace {

CorpusStore clean_store(std::size_t n) {
  std::vector<Document> docs;
  for (std::size_t i = 0; i < n; ++i) {
    docs.push_back({"d" + std::to_string(i), "text " + std::to_string(i), Provenance::clean, {}, {}});
  }
  return CorpusStore(std::move(docs));
}

std::vector<MaliciousText> texts_for(const std::string& qid, int n) {
  std::vector<MaliciousText> out;
  for (int j = 1; j <= n; ++j) {
    out.push_back({qid, j, "R", "H {instruction}", "I", "R H I " + std::to_string(j)});
  }
  return out;
}

}  // namespace

TEST(Ingest, TwoLineFile) {
  testutil::TempDir dir;
  testutil::write_text(dir / "c.jsonl", "{\"id\":\"a\",\"text\":\"alpha\"}\n{\"id\":\"b\",\"text\":\"beta\"}\n");
  const auto store = CorpusStore::ingest_jsonl(dir / "c.jsonl");
  ASSERT_EQ(store.size(), 2u);
  EXPECT_EQ(store[0].id, "a");
  EXPECT_EQ(store[1].text, "beta");
  EXPECT_EQ(store[0].provenance, Provenance::clean);
  EXPECT_EQ(store[1].provenance, Provenance::clean);
  EXPECT_EQ(store.clean_count(), 2u);
}

TEST(Ingest, EmptyFile) {
  testutil::TempDir dir;
  testutil::write_text(dir / "c.jsonl", "");
  EXPECT_TRUE(CorpusStore::ingest_jsonl(dir / "c.jsonl").empty());
}

TEST(Ingest, MissingTextReportsLine) {
  std::istringstream in("{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"b\"}\n");
  try {
    CorpusStore::parse_jsonl(in, "corpus");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("text"), std::string::npos);
  }
}

TEST(Ingest, MalformedJsonReportsLine) {
  std::istringstream in("{\"id\":\"a\",\"text\":\"x\"}\n\n{not json\n");
  try {
    CorpusStore::parse_jsonl(in, "corpus");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Ingest, DuplicateIdRejected) {
  std::istringstream in("{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}\n");
  EXPECT_THROW(CorpusStore::parse_jsonl(in, "corpus"), DuplicateIdError);
}

TEST(Ingest, ProvenanceInvariantEnforced) {
  std::istringstream in("{\"id\":\"a\",\"text\":\"x\",\"provenance\":\"malicious\"}\n");
  EXPECT_THROW(CorpusStore::parse_jsonl(in, "corpus"), ParseError);
  EXPECT_THROW(CorpusStore({{"m", "t", Provenance::clean, std::string("q1"), 1}}), ValidationError);
}

TEST(Ingest, NonexistentPathIsIoError) {
  EXPECT_THROW(CorpusStore::load("/nonexistent/dir/corpus.jsonl"), IoError);
}

TEST(Inject, FiveTextsIntoThousandDocs) {
  const auto base = clean_store(1000);
  const auto texts = texts_for("q1", 5);
  const auto out = base.inject(texts);
  EXPECT_EQ(out.size(), 1005u);
  EXPECT_EQ(out.malicious_count(), 5u);
  EXPECT_EQ(out.clean_count(), 1000u);
  EXPECT_EQ(base.size(), 1000u);
  const Document* d = out.find("mal-q1-3");
  ASSERT_NE(d, nullptr);
  EXPECT_EQ(d->provenance, Provenance::malicious);
  EXPECT_EQ(d->origin_query_id, "q1");
  EXPECT_EQ(d->origin_index, 3);
  EXPECT_EQ(d->text, "R H I 3");
}

TEST(Inject, EmptyListIsIdentity) {
  const auto base = clean_store(10);
  EXPECT_EQ(base.inject({}), base);
}

TEST(Inject, HundredQueriesTimesFive) {
  const auto base = clean_store(1000);
  std::vector<MaliciousText> all;
  for (int q = 0; q < 100; ++q) {
    auto t = texts_for("q" + std::to_string(q), 5);
    all.insert(all.end(), t.begin(), t.end());
  }
  const auto out = base.inject(all);
  EXPECT_EQ(out.size(), 1500u);
  EXPECT_EQ(out.clean_count() + out.malicious_count(), out.size());
}

TEST(Inject, PreservesOrderOfExistingDocuments) {
  const auto base = clean_store(20);
  const auto out = base.inject(texts_for("q", 3));
  for (std::size_t i = 0; i < base.size(); ++i) EXPECT_EQ(out[i], base[i]);
  EXPECT_EQ(out[20].id, "mal-q-1");
  EXPECT_EQ(out[22].id, "mal-q-3");
}

TEST(Inject, DuplicateMaliciousIdRejected) {
  const auto base = clean_store(2);
  auto t = texts_for("q", 1);
  t.push_back(t.front());
  EXPECT_THROW(base.inject(t), DuplicateIdError);
}

TEST(Persist, MixedStoreRoundTrips) {
  testutil::TempDir dir;
  const auto store = clean_store(5).inject(texts_for("q\"x", 2));
  store.persist(dir / "s.jsonl");
  const auto loaded = CorpusStore::load(dir / "s.jsonl");
  EXPECT_EQ(loaded, store);
  EXPECT_EQ(loaded.malicious_count(), 2u);
}

TEST(Persist, SerializationIsDeterministic) {
  testutil::TempDir dir;
  const auto store = clean_store(50).inject(texts_for("q", 5));
  store.persist(dir / "a.jsonl");
  store.persist(dir / "b.jsonl");
  const auto a = testutil::read_text(dir / "a.jsonl");
  EXPECT_EQ(fnv1a64(a), fnv1a64(testutil::read_text(dir / "b.jsonl")));
  EXPECT_EQ(fnv1a64(a), store.content_hash());
}

TEST(Persist, UnwritablePathIsIoError) {
  testutil::TempDir dir;
  testutil::write_text(dir / "file", "x");
  EXPECT_THROW(clean_store(1).persist(dir / "file" / "sub" / "c.jsonl"), IoError);
}
