#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <json.hpp>
#include <sstream>

#include "ragjack/datasets.hpp"
#include "test_util.hpp"

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RAGJACK_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

/// Small synthetic experiment written by the CLI itself.
class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    data_ = (dir_ / "data").string();
    ASSERT_EQ(run_cli("synth --out " + data_ + " --seed 4 --n-docs 150 --n-queries 8 --n-non-target 8"), 0);
    ini_ = data_ + "/experiment.ini";
  }
  std::string out(const std::string& name) const { return (dir_ / name).string(); }

  testutil::TempDir dir_;
  std::string data_;
  std::string ini_;
};

}  // namespace

TEST_F(CliTest, SynthIsReproducible) {
  ASSERT_EQ(run_cli("synth --out " + out("again") + " --seed 4 --n-docs 150 --n-queries 8 --n-non-target 8"), 0);
  for (const char* f : {"corpus.jsonl", "queries.jsonl", "experiment.ini"}) {
    EXPECT_EQ(testutil::read_text(data_ + "/" + f), testutil::read_text(out("again") + "/" + f)) << f;
  }
}

TEST_F(CliTest, SynthZeroDocs) {
  ASSERT_EQ(run_cli("synth --out " + out("empty") + " --n-docs 0"), 0);
  EXPECT_EQ(testutil::read_text(out("empty") + "/corpus.jsonl"), "");
}

TEST_F(CliTest, CraftBlackBoxKeepsQueryVerbatim) {
  ASSERT_EQ(run_cli("craft -c " + ini_ + " --setting black_box -o " + out("bb")), 0);
  const auto texts = ragjack::load_malicious_texts(out("bb") + "/crafted.jsonl");
  const auto queries = ragjack::load_queries(data_ + "/queries.jsonl");
  ASSERT_EQ(texts.size(), queries.size() * 5);
  for (const auto& m : texts) {
    const auto it = std::find_if(queries.begin(), queries.end(),
                                 [&](const ragjack::TargetQuery& q) { return q.id == m.query_id; });
    ASSERT_NE(it, queries.end());
    EXPECT_EQ(m.retrieval_text, it->question);
  }
}

TEST_F(CliTest, CraftWhiteBoxLogsDominance) {
  ASSERT_EQ(run_cli("craft -c " + ini_ + " --setting white_box --set encoder.dim=128 -o " + out("wb")), 0);
  std::istringstream log(testutil::read_text(out("wb") + "/craft_log.csv"));
  std::string line;
  std::getline(log, line);
  EXPECT_EQ(line, "query_id,j,black_box_similarity,white_box_similarity,accepted_flips");
  int rows = 0;
  while (std::getline(log, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    ASSERT_EQ(cols.size(), 5u);
    EXPECT_GE(std::stod(cols[3]), std::stod(cols[2])) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 40);
}

TEST_F(CliTest, UnknownSettingIsUsageError) {
  EXPECT_EQ(run_cli("craft -c " + ini_ + " --setting grey_box -o " + out("x")), 2);
  EXPECT_EQ(run_cli("eval -c " + ini_ + " --set retrieval.depth=3 -o " + out("x")), 2);
  EXPECT_EQ(run_cli("eval -c " + out("missing.ini") + " -o " + out("x")), 2);
  EXPECT_NE(run_cli("frobnicate"), 0);
}

TEST_F(CliTest, EvalNoneHasZeroAsr) {
  ASSERT_EQ(run_cli("eval -c " + ini_ + " --setting none -o " + out("none")), 0);
  const auto report = nlohmann::json::parse(testutil::read_text(out("none") + "/report.json"));
  EXPECT_EQ(report.at("aggregates").at("asr").get<double>(), 0.0);
}

TEST_F(CliTest, EvalWritesAllOutputs) {
  ASSERT_EQ(run_cli("eval -c " + ini_ + " --k 6 --n-a 2 -o " + out("ev")), 0);
  for (const char* f : {"config.ini", "crafted.jsonl", "report.json", "report.csv", "leakage.json"}) {
    EXPECT_TRUE(std::filesystem::exists(out("ev") + "/" + f)) << f;
  }
  const auto report = nlohmann::json::parse(testutil::read_text(out("ev") + "/report.json"));
  EXPECT_EQ(report.at("outcomes").size(), 8u);
  EXPECT_NE(testutil::read_text(out("ev") + "/config.ini").find("k = 6"), std::string::npos);
}

TEST_F(CliTest, InjectThenEvalAreConsistent) {
  ASSERT_EQ(run_cli("craft -c " + ini_ + " -o " + out("c")), 0);
  ASSERT_EQ(run_cli("inject -c " + ini_ + " --texts " + out("c") + "/crafted.jsonl -o " + out("i")), 0);
  const auto corpus = testutil::read_text(out("i") + "/poisoned_corpus.jsonl");
  EXPECT_EQ(std::count(corpus.begin(), corpus.end(), '\n'), 150 + 40);
}

TEST_F(CliTest, DefendExpandWritesFourRows) {
  ASSERT_EQ(run_cli("defend expand -c " + ini_ + " --k-values 5,10,20,50 -o " + out("exp")), 0);
  const auto csv = testutil::read_text(out("exp") + "/expansion.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST_F(CliTest, DefendParaphraseIdentityMatchesEval) {
  ASSERT_EQ(run_cli("eval -c " + ini_ + " -o " + out("plain")), 0);
  ASSERT_EQ(run_cli("defend paraphrase -c " + ini_ + " --paraphraser identity -o " + out("para")), 0);
  EXPECT_EQ(testutil::read_text(out("plain") + "/report.json"), testutil::read_text(out("para") + "/report.json"));
}

TEST_F(CliTest, TransferNeedsTwoEncoders) {
  EXPECT_EQ(run_cli("transfer -c " + ini_ + " --encoders 1:64 -o " + out("t1")), 2);
  ASSERT_EQ(run_cli("transfer -c " + ini_ + " --encoders 1:64,2:64 -o " + out("t2")), 0);
  const auto csv = testutil::read_text(out("t2") + "/transfer.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST_F(CliTest, RerunIsByteIdentical) {
  ASSERT_EQ(run_cli("eval -c " + ini_ + " -o " + out("r1")), 0);
  ASSERT_EQ(run_cli("eval -c " + ini_ + " -o " + out("r2")), 0);
  for (const char* f : {"report.json", "report.csv", "crafted.jsonl", "leakage.json"}) {
    EXPECT_EQ(testutil::read_text(out("r1") + "/" + f), testutil::read_text(out("r2") + "/" + f)) << f;
  }
}
