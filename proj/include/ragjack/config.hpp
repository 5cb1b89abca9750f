#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ragjack/evaluation.hpp"

namespace ragjack {

/// Experiment settings as read from an INI file ([data], [encoder],
/// [retrieval], [attack], [hotflip], [generator], [evaluation], [defense],
/// [transfer], [run]). Relative paths resolve against the file's directory.
struct ExperimentConfig {
  std::filesystem::path base_dir = ".";

  std::filesystem::path corpus;
  std::filesystem::path queries;
  std::filesystem::path non_target_queries;
  std::filesystem::path pool;          ///< empty = bundled pool
  std::filesystem::path instructions;  ///< empty = bundled instructions
  std::filesystem::path synonyms;      ///< empty = bundled table
  std::string instruction_id = "content_manipulation";

  EncoderParams encoder{768, 0, 0.0};
  SimilarityKind similarity = SimilarityKind::dot;
  std::size_t k = 5;
  int n_a = 5;
  AttackSetting setting = AttackSetting::black_box;
  bool curate = true;
  std::size_t max_len = 64;
  double dedup_threshold = 0.8;
  HotflipConfig hotflip;

  GeneratorKind generator = GeneratorKind::oracle;
  Precedence precedence = Precedence::hijack_wins;
  HttpSpec http;
  MatchRule match = MatchRule::substring;

  std::vector<std::size_t> expansion_k{5, 10, 20, 50};
  std::vector<EncoderParams> transfer_encoders;

  std::filesystem::path out = "runs/default";
  std::uint64_t seed = 0;

  /// Reads an INI file; unknown sections or keys are configuration errors.
  static ExperimentConfig load(const std::filesystem::path& path);
  /// Parses INI text; `base_dir` anchors relative paths.
  static ExperimentConfig parse(const std::string& ini_text, const std::filesystem::path& base_dir);

  /// Sets "section.key" to `value` with the same validation as the file.
  void set(const std::string& dotted_key, const std::string& value);

  /// Canonical INI with every key and absolute paths.
  std::string to_ini() const;

  void validate() const;

  /// Loads all referenced files into an Experiment.
  Experiment resolve() const;

  std::filesystem::path resolve_path(const std::filesystem::path& p) const;
};

/// "seed:dim" or "seed:dim:passage_mix", comma separated.
std::vector<EncoderParams> parse_encoder_list(const std::string& spec);

}  // namespace ragjack
