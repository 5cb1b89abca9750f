#pragma once

#include "ragjack/attack.hpp"
#include "ragjack/datasets.hpp"
#include "ragjack/evaluation.hpp"
#include "ragjack/synth.hpp"

namespace testutil {

/// Synthetic dataset wired into an experiment the same way the CLI resolves
/// a generated experiment.ini: curated bundled pool, bundled instructions,
/// oracle generator with hijack-wins precedence.
inline ragjack::Experiment synthetic_experiment(const ragjack::SynthDataset& data,
                                                ragjack::EncoderParams enc = {768, 1, 0.0}) {
  using namespace ragjack;
  Experiment ex;
  ex.corpus = data.corpus;
  ex.queries = data.targets;
  ex.non_targets = data.non_targets;
  const auto raw = bundled_hijack_pool();
  ex.pool = curate_pool(raw, 64, 0.8, fit_pool_model(raw));
  ex.instructions = bundled_instructions();
  ex.instruction = find_instruction(ex.instructions, "content_manipulation");
  ex.encoder = enc;
  ex.k = 5;
  ex.n_a = 5;
  ex.setting = AttackSetting::black_box;
  ex.generator.oracle = make_oracle_rules(ex.pool, ex.instructions, Precedence::hijack_wins);
  return ex;
}

inline ragjack::SynthDataset small_synthetic(std::uint64_t seed = 0) {
  ragjack::SynthConfig cfg;
  cfg.seed = seed;
  cfg.n_docs = 300;
  cfg.n_queries = 20;
  cfg.n_non_target = 20;
  return ragjack::generate_synthetic(cfg);
}

}  // namespace testutil
