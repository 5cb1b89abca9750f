#include "ragjack/hotflip.hpp"

#include <algorithm>

#include "ragjack/error.hpp"

namespace ragjack {

namespace {

std::vector<TokenId> concat(std::span<const TokenId> a, std::span<const TokenId> b) {
  std::vector<TokenId> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

double passage_similarity(const DualEncoder& enc, std::span<const double> q_vec,
                          std::span<const TokenId> passage, SimilarityKind kind) {
  return similarity(q_vec, enc.encode_passage(passage), kind);
}

}  // namespace

std::string to_string(PositionSchedule s) {
  return s == PositionSchedule::best_gain ? "best_gain" : "round_robin";
}

PositionSchedule position_schedule_from_string(std::string_view name) {
  if (name == "best_gain") return PositionSchedule::best_gain;
  if (name == "round_robin") return PositionSchedule::round_robin;
  throw ConfigError("unknown hotflip schedule '" + std::string(name) +
                    "' (expected best_gain|round_robin)");
}

void HotflipConfig::validate() const {
  if (max_iterations < 1) throw ConfigError("hotflip max_iterations must be >= 1");
  if (positions_per_iteration < 1) throw ConfigError("hotflip positions_per_iteration must be >= 1");
  if (patience < 1) throw ConfigError("hotflip patience must be >= 1");
}

namespace {

/// Caches E_p . g for the last gradient row seen; under dot similarity the
/// gradient never changes during a run, so the V x d product is paid once.
class TokenScorer {
 public:
  explicit TokenScorer(const Matrix& table) : table_(table) {}

  const std::vector<double>& scores(std::span<const double> g) {
    if (!valid_ || !std::equal(g.begin(), g.end(), row_.begin(), row_.end())) {
      row_.assign(g.begin(), g.end());
      scores_.resize(table_.rows());
      for (std::size_t t = 0; t < table_.rows(); ++t) scores_[t] = dot(table_.row(t), g);
      valid_ = true;
    }
    return scores_;
  }

 private:
  const Matrix& table_;
  std::vector<double> row_;
  std::vector<double> scores_;
  bool valid_ = false;
};

std::optional<FlipCandidate> propose(TokenScorer& scorer, const DualEncoder& enc,
                                     std::span<const double> q_vec, std::span<const TokenId> r,
                                     std::span<const TokenId> suffix, SimilarityKind kind,
                                     const std::set<std::pair<std::size_t, TokenId>>& rejected,
                                     std::optional<std::size_t> only_position) {
  if (r.empty()) return std::nullopt;
  const Matrix grad = similarity_gradient(enc, q_vec, concat(r, suffix), kind);
  const std::size_t vocab = enc.passage_table().rows();

  std::optional<FlipCandidate> best;
  const std::size_t first = only_position ? *only_position : 0;
  const std::size_t last = only_position ? *only_position + 1 : r.size();
  for (std::size_t i = first; i < last && i < r.size(); ++i) {
    const auto& token_scores = scorer.scores(grad.row(i));
    const TokenId from = r[i];
    const double base = token_scores[from];
    for (std::size_t t = 0; t < vocab; ++t) {
      const auto to = static_cast<TokenId>(t);
      if (to == kUnknownToken || to == from) continue;
      const double s = token_scores[t] - base;
      if (best && !(s > best->linear_score)) continue;
      if (rejected.count({i, to})) continue;
      best = FlipCandidate{i, from, to, s};
    }
  }
  return best;
}

}  // namespace

std::optional<FlipCandidate> hotflip_propose(
    const DualEncoder& enc, std::span<const double> q_vec, std::span<const TokenId> r,
    std::span<const TokenId> suffix, SimilarityKind kind,
    const std::set<std::pair<std::size_t, TokenId>>& rejected,
    std::optional<std::size_t> only_position) {
  TokenScorer scorer(enc.passage_table());
  return propose(scorer, enc, q_vec, r, suffix, kind, rejected, only_position);
}

HotflipResult hotflip_optimize(const TokenSequence& r0, const TokenSequence& suffix,
                               std::span<const double> q_vec, const TextEncoder& enc,
                               const HotflipConfig& cfg) {
  cfg.validate();
  if (r0.empty()) throw ValidationError("hotflip: retrieval text has no tokens");
  const DualEncoder& model = enc.encoder();
  const SimilarityKind kind = enc.kind();

  HotflipResult out;
  out.retrieval = r0;
  std::vector<TokenId>& r = out.retrieval.ids;
  double current = passage_similarity(model, q_vec, concat(r, suffix.ids), kind);
  out.initial_similarity = current;

  std::set<std::pair<std::size_t, TokenId>> rejected;
  TokenScorer scorer(model.passage_table());
  std::size_t cursor = 0;
  int stale = 0;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    out.iterations = it + 1;
    bool improved = false;
    bool exhausted = false;
    for (int p = 0; p < cfg.positions_per_iteration; ++p) {
      std::optional<std::size_t> position;
      if (cfg.schedule == PositionSchedule::round_robin) position = cursor++ % r.size();
      auto cand = propose(scorer, model, q_vec, r, suffix.ids, kind, rejected, position);
      if (!cand) {
        if (cfg.schedule == PositionSchedule::best_gain) exhausted = true;
        continue;
      }
      FlipStep step{it, *cand, current, current, false};
      const TokenId old = r[cand->position];
      r[cand->position] = cand->to;
      const double next = passage_similarity(model, q_vec, concat(r, suffix.ids), kind);
      step.similarity_after = next;
      if (next > current) {
        step.accepted = true;
        current = next;
        out.retrieval.words[cand->position] = enc.vocabulary().token(cand->to);
        rejected.clear();
        improved = true;
      } else {
        r[cand->position] = old;
        rejected.insert({cand->position, cand->to});
      }
      out.trace.push_back(step);
    }
    if (exhausted && !improved) break;
    stale = improved ? 0 : stale + 1;
    if (stale >= cfg.patience) break;
  }
  out.final_similarity = current;
  out.retrieval.source = detokenize(out.retrieval);
  return out;
}

}  // namespace ragjack
