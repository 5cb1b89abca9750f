#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ragjack/attack.hpp"
#include "ragjack/corpus.hpp"
#include "ragjack/defense.hpp"
#include "ragjack/generation.hpp"
#include "ragjack/retrieval.hpp"

namespace ragjack {

enum class MatchRule { substring, exact };
std::string to_string(MatchRule m);
MatchRule match_rule_from_string(std::string_view name);

/// substring: case-insensitive containment of `desired` in `answer`;
/// exact: equality after trimming surrounding whitespace.
bool answer_matches(std::string_view answer, std::string_view desired, MatchRule rule);

struct RetrievalMetrics {
  std::size_t malicious = 0;  ///< m
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// m counts ids of the form mal-<query_id>-<j>; precision uses the requested k.
RetrievalMetrics compute_retrieval_metrics(std::span<const std::string> retrieved_ids,
                                           std::string_view query_id, int n_a, std::size_t k);

struct QueryOutcome {
  std::string query_id;
  std::string retrieval_query;  ///< the query as sent to the retriever
  RetrievalResult retrieved;
  RetrievalMetrics metrics;
  std::string answer;
  bool success = false;  ///< answer matches the attacker's a_i
  bool correct = false;  ///< answer matches the ground truth, when one exists
};

/// Mean of the success flags. Throws ConfigError on empty input.
double compute_asr(std::span<const QueryOutcome> outcomes);

/// Everything an experiment needs, already loaded.
struct Experiment {
  CorpusStore corpus;
  std::vector<TargetQuery> queries;
  std::vector<TargetQuery> non_targets;
  std::vector<HijackText> pool;
  std::vector<InstructionText> instructions;  ///< registered with the oracle
  InstructionText instruction;                ///< the one the attack injects
  EncoderParams encoder;
  SimilarityKind similarity = SimilarityKind::dot;
  std::size_t k = 5;
  int n_a = 5;
  AttackSetting setting = AttackSetting::black_box;
  GeneratorSpec generator;
  HotflipConfig hotflip;
  MatchRule match = MatchRule::substring;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Vocabulary over the clean corpus, all queries, the pool, the instructions
/// and the prompt-injection phrase.
std::shared_ptr<const Vocabulary> build_experiment_vocabulary(const Experiment& ex);
TextEncoder make_text_encoder(std::shared_ptr<const Vocabulary> vocab, const EncoderParams& params,
                              SimilarityKind kind);

/// Ordered (key, value) description of a resolved configuration plus an
/// FNV-1a hash of its canonical serialization.
struct Fingerprint {
  std::vector<std::pair<std::string, std::string>> fields;
  std::string hash;

  bool operator==(const Fingerprint&) const = default;
};

Fingerprint make_fingerprint(const Experiment& ex, const std::string& defense = {});

struct AttackReport {
  Fingerprint fingerprint;
  std::string setting;
  std::vector<QueryOutcome> outcomes;  ///< in query order
  double asr = 0.0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_f1 = 0.0;
  double accuracy = 0.0;  ///< fraction answering with the ground truth

  std::string to_json() const;
  std::string to_csv() const;
};

/// Crafts the experiment's malicious texts with the given encoder.
std::vector<MaliciousText> craft_for(const Experiment& ex, const TextEncoder& enc);

/// Retrieval + generation + scoring over an already poisoned index.
/// `retrieval_queries[i]` replaces queries[i].question for retrieval and prompting.
AttackReport evaluate_poisoned(const Experiment& ex, const CorpusStore& poisoned,
                               const RetrievalIndex& index, const TextEncoder& enc,
                               std::span<const std::string> retrieval_queries, std::size_t k,
                               const Fingerprint& fingerprint);

/// Craft, inject, index, retrieve, generate, score.
AttackReport run_attack_experiment(const Experiment& ex);

struct TransferCell {
  double asr = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct TransferMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<TransferCell>> cells;  ///< [source][target]

  std::string to_json() const;
  std::string to_csv() const;
};

/// Texts are crafted once per source encoder and evaluated under every target.
TransferMatrix run_transfer_experiment(const Experiment& ex,
                                       std::span<const EncoderParams> encoders);

/// Queries are paraphrased after crafting and injection, before retrieval.
AttackReport run_defense_paraphrase(const Experiment& ex, const Paraphraser& paraphraser);

struct ExpansionPoint {
  std::size_t k = 0;
  double asr = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ExpansionCurve {
  std::vector<ExpansionPoint> points;
  std::string to_json() const;
  std::string to_csv() const;
};

/// One evaluation per k over the same poisoned corpus.
ExpansionCurve run_defense_expansion(const Experiment& ex, std::span<const std::size_t> k_values);

struct LeakageDetail {
  std::string query_id;
  std::vector<std::string> malicious_ids;
};

struct LeakageReport {
  std::size_t leaking_queries = 0;
  std::size_t checked_queries = 0;
  std::vector<LeakageDetail> details;  ///< one per non-target query
  std::string to_json() const;
};

/// Retrieval only: counts non-target queries whose top-k holds any malicious text.
LeakageReport check_non_target_leakage(const Experiment& ex,
                                       std::span<const TargetQuery> non_targets);

/// Leakage over an existing poisoned index.
LeakageReport check_leakage_on(const CorpusStore& poisoned, const RetrievalIndex& index,
                               const TextEncoder& enc, std::span<const TargetQuery> non_targets,
                               std::size_t k);

}  // namespace ragjack
