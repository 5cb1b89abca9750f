#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ragjack/encoder.hpp"

namespace ragjack {

enum class PositionSchedule {
  /// Every step takes the (position, token) pair with the largest linear score.
  best_gain,
  /// Step s only considers position s mod |R|.
  round_robin,
};

std::string to_string(PositionSchedule s);
PositionSchedule position_schedule_from_string(std::string_view name);

struct HotflipConfig {
  int max_iterations = 30;
  int positions_per_iteration = 1;
  /// Consecutive iterations without an accepted flip before stopping.
  int patience = 5;
  PositionSchedule schedule = PositionSchedule::best_gain;

  void validate() const;
};

struct FlipCandidate {
  std::size_t position = 0;
  TokenId from = kUnknownToken;
  TokenId to = kUnknownToken;
  /// (e_to - e_from) . grad at this position.
  double linear_score = 0.0;
};

struct FlipStep {
  int iteration = 0;
  FlipCandidate candidate;
  double similarity_before = 0.0;
  double similarity_after = 0.0;
  bool accepted = false;
};

struct HotflipResult {
  TokenSequence retrieval;  ///< optimized R, same length as the input
  double initial_similarity = 0.0;
  double final_similarity = 0.0;
  std::vector<FlipStep> trace;
  int iterations = 0;
};

/// Scores every candidate substitution inside R (the first |r| positions of
/// r ++ suffix) by the gradient approximation and returns the best one not in
/// `rejected`. UNK and the token already at a position are never proposed.
/// Ties go to the lower position, then the lower token id. With `only_position`
/// set, only that position is considered.
std::optional<FlipCandidate> hotflip_propose(
    const DualEncoder& enc, std::span<const double> q_vec, std::span<const TokenId> r,
    std::span<const TokenId> suffix, SimilarityKind kind,
    const std::set<std::pair<std::size_t, TokenId>>& rejected = {},
    std::optional<std::size_t> only_position = std::nullopt);

/// Greedy HotFlip over the retrieval tokens, keeping `suffix` fixed. A flip is
/// kept only when the recomputed similarity strictly improves.
HotflipResult hotflip_optimize(const TokenSequence& r0, const TokenSequence& suffix,
                               std::span<const double> q_vec, const TextEncoder& enc,
                               const HotflipConfig& cfg);

}  // namespace ragjack
