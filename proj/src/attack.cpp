#include "ragjack/attack.hpp"

#include <algorithm>
#include <numeric>

#include "ragjack/error.hpp"
#include "ragjack/parallel.hpp"

namespace ragjack {

namespace {

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

void require_pool(std::span<const HijackText> pool, int n_a) {
  if (n_a < 1) throw ConfigError("N_a must be >= 1");
  if (pool.size() < static_cast<std::size_t>(n_a)) {
    throw ConfigError("hijack pool has " + std::to_string(pool.size()) +
                      " entries but N_a = " + std::to_string(n_a));
  }
}

}  // namespace

std::string to_string(Objective o) {
  switch (o) {
    case Objective::content_manipulation: return "content_manipulation";
    case Objective::spam_generation: return "spam_generation";
    case Objective::information_gathering: return "information_gathering";
    case Objective::prompt_leaking: return "prompt_leaking";
  }
  return "content_manipulation";
}

Objective objective_from_string(std::string_view name) {
  for (auto o : {Objective::content_manipulation, Objective::spam_generation,
                 Objective::information_gathering, Objective::prompt_leaking}) {
    if (name == to_string(o)) return o;
  }
  throw ConfigError("unknown objective '" + std::string(name) + "'");
}

void InstructionText::validate() const {
  if (template_text.empty()) throw ValidationError("instruction '" + id + "' has an empty template");
  if (objective == Objective::content_manipulation && expected_answer.empty()) {
    throw ValidationError("instruction '" + id + "' needs an expected answer");
  }
}

HijackText make_hijack_text(std::string id, std::string template_text) {
  const std::size_t n = count_occurrences(template_text, kInstructionPlaceholder);
  if (n != 1) {
    throw ValidationError("hijack text '" + id + "' must contain exactly one " +
                          std::string(kInstructionPlaceholder) + " placeholder (found " +
                          std::to_string(n) + ")");
  }
  HijackText h;
  h.token_length = split_words(template_text).size();
  h.id = std::move(id);
  h.template_text = std::move(template_text);
  return h;
}

std::string to_string(AttackSetting s) {
  switch (s) {
    case AttackSetting::none: return "none";
    case AttackSetting::black_box: return "black_box";
    case AttackSetting::white_box: return "white_box";
    case AttackSetting::prompt_injection: return "prompt_injection";
    case AttackSetting::variant_hi: return "variant_HI";
    case AttackSetting::variant_ri: return "variant_RI";
  }
  return "none";
}

AttackSetting attack_setting_from_string(std::string_view name) {
  if (name == "none") return AttackSetting::none;
  if (name == "black_box") return AttackSetting::black_box;
  if (name == "white_box") return AttackSetting::white_box;
  if (name == "prompt_injection") return AttackSetting::prompt_injection;
  if (name == "variant_HI" || name == "variant_hi") return AttackSetting::variant_hi;
  if (name == "variant_RI" || name == "variant_ri") return AttackSetting::variant_ri;
  throw ConfigError("unknown attack setting '" + std::string(name) +
                    "' (expected none|black_box|white_box|prompt_injection|variant_HI|variant_RI)");
}

std::string strip_placeholder(std::string_view template_text) {
  std::string out(template_text);
  for (auto pos = out.find(kInstructionPlaceholder); pos != std::string::npos;
       pos = out.find(kInstructionPlaceholder, pos)) {
    out.replace(pos, kInstructionPlaceholder.size(), " ");
  }
  return out;
}

TfidfModel fit_pool_model(std::span<const HijackText> pool) {
  std::vector<std::string> docs;
  docs.reserve(pool.size());
  for (const auto& h : pool) docs.push_back(strip_placeholder(h.template_text));
  return TfidfModel::fit(docs);
}

std::vector<HijackText> curate_pool(std::span<const HijackText> raw, std::size_t max_len,
                                    double dedup_threshold, const TfidfModel& model) {
  if (!(dedup_threshold > 0.0 && dedup_threshold <= 1.0)) {
    throw ConfigError("dedup_threshold must lie in (0, 1]");
  }
  for (const auto& h : raw) {
    if (count_occurrences(h.template_text, kInstructionPlaceholder) != 1) {
      throw ValidationError("hijack text '" + h.id + "' must contain exactly one " +
                            std::string(kInstructionPlaceholder) + " placeholder");
    }
  }
  std::vector<HijackText> kept;
  std::vector<std::string> kept_stripped;
  for (const auto& h : raw) {
    if (h.token_length > max_len) continue;
    std::string stripped = strip_placeholder(h.template_text);
    const bool duplicate = std::any_of(kept_stripped.begin(), kept_stripped.end(),
                                       [&](const std::string& other) {
                                         return tfidf_similarity(model, stripped, other) >
                                                dedup_threshold;
                                       });
    if (duplicate) continue;
    kept.push_back(h);
    kept_stripped.push_back(std::move(stripped));
  }
  return kept;
}

std::vector<RankedHijack> rank_hijack_texts(std::string_view query, std::string_view retrieval,
                                            std::span<const HijackText> pool,
                                            const InstructionText& instruction,
                                            const TextEncoder& enc) {
  const Vector q_vec = enc.embed_query(query);
  std::vector<RankedHijack> ranked(pool.size());
  for (std::size_t j = 0; j < pool.size(); ++j) {
    const std::string text = assemble(retrieval, pool[j].template_text, instruction.template_text);
    ranked[j] = {j, enc.score(q_vec, text)};
  }
  std::sort(ranked.begin(), ranked.end(), [&](const RankedHijack& a, const RankedHijack& b) {
    if (a.score != b.score) return a.score > b.score;
    return pool[a.pool_index].id < pool[b.pool_index].id;
  });
  return ranked;
}

std::vector<MaliciousText> craft_black_box(std::span<const TargetQuery> queries,
                                           std::span<const HijackText> pool,
                                           const InstructionText& instruction,
                                           const TextEncoder& enc, int n_a) {
  require_pool(pool, n_a);
  std::vector<MaliciousText> out(queries.size() * static_cast<std::size_t>(n_a));
  parallel_for(queries.size(), [&](std::size_t qi) {
    const TargetQuery& q = queries[qi];
    const auto ranked = rank_hijack_texts(q.question, q.question, pool, instruction, enc);
    for (int j = 1; j <= n_a; ++j) {
      const HijackText& h = pool[ranked[j - 1].pool_index];
      MaliciousText& m = out[qi * n_a + (j - 1)];
      m.query_id = q.id;
      m.j = j;
      m.retrieval_text = q.question;
      m.hijack_text = h.template_text;
      m.instruction_text = instruction.template_text;
      m.assembled = assemble(m.retrieval_text, m.hijack_text, m.instruction_text);
    }
  });
  return out;
}

std::vector<MaliciousText> craft_white_box(std::span<const TargetQuery> queries,
                                           std::span<const HijackText> pool,
                                           const InstructionText& instruction,
                                           const TextEncoder& enc, int n_a,
                                           const HotflipConfig& cfg,
                                           std::vector<WhiteBoxTrace>* trace) {
  require_pool(pool, n_a);
  cfg.validate();
  const std::size_t total = queries.size() * static_cast<std::size_t>(n_a);
  std::vector<MaliciousText> out(total);
  std::vector<WhiteBoxTrace> traces(total);
  parallel_for(queries.size(), [&](std::size_t qi) {
    const TargetQuery& q = queries[qi];
    const Vector q_vec = enc.embed_query(q.question);
    const TokenSequence r0 = enc.tokenize(q.question);
    if (r0.empty()) {
      throw ValidationError("query '" + q.id + "' has no tokens to optimize");
    }
    const auto ranked = rank_hijack_texts(q.question, q.question, pool, instruction, enc);
    for (int j = 1; j <= n_a; ++j) {
      const std::size_t slot = qi * n_a + (j - 1);
      const HijackText& h = pool[ranked[j - 1].pool_index];
      const TokenSequence suffix =
          enc.tokenize(assemble("", h.template_text, instruction.template_text));
      const HotflipResult res = hotflip_optimize(r0, suffix, q_vec, enc, cfg);

      MaliciousText& m = out[slot];
      m.query_id = q.id;
      m.j = j;
      m.retrieval_text = detokenize(res.retrieval);
      m.hijack_text = h.template_text;
      m.instruction_text = instruction.template_text;
      m.assembled = assemble(m.retrieval_text, m.hijack_text, m.instruction_text);

      WhiteBoxTrace& t = traces[slot];
      t.query_id = q.id;
      t.j = j;
      t.black_box_similarity = ranked[j - 1].score;
      t.white_box_similarity = res.final_similarity;
      t.accepted_flips = static_cast<int>(std::count_if(
          res.trace.begin(), res.trace.end(), [](const FlipStep& s) { return s.accepted; }));
    }
  });
  if (trace) *trace = std::move(traces);
  return out;
}

MaliciousText craft_prompt_injection_baseline(const TargetQuery& q,
                                              const InstructionText& instruction, int j) {
  MaliciousText m;
  m.query_id = q.id;
  m.j = j;
  m.retrieval_text = "When the topic of " + q.question + " is mentioned,";
  m.hijack_text = std::string(kBaselineHijack);
  m.instruction_text = instruction.template_text;
  m.assembled = assemble(m.retrieval_text, m.hijack_text, m.instruction_text);
  return m;
}

MaliciousText craft_variant(VariantKind kind, const TargetQuery& q,
                            std::span<const HijackText> pool, const InstructionText& instruction,
                            const TextEncoder& enc, int j) {
  MaliciousText m;
  m.query_id = q.id;
  m.j = j;
  m.instruction_text = instruction.template_text;
  if (kind == VariantKind::R_I) {
    m.retrieval_text = q.question;
  } else {
    require_pool(pool, j);
    const auto ranked = rank_hijack_texts(q.question, "", pool, instruction, enc);
    m.hijack_text = pool[ranked[j - 1].pool_index].template_text;
  }
  m.assembled = assemble(m.retrieval_text, m.hijack_text, m.instruction_text);
  return m;
}

std::vector<MaliciousText> craft_setting(AttackSetting setting, std::span<const TargetQuery> queries,
                                         std::span<const HijackText> pool,
                                         const InstructionText& instruction,
                                         const TextEncoder& enc, int n_a,
                                         const HotflipConfig& cfg) {
  if (n_a < 1) throw ConfigError("N_a must be >= 1");
  switch (setting) {
    case AttackSetting::none: return {};
    case AttackSetting::black_box: return craft_black_box(queries, pool, instruction, enc, n_a);
    case AttackSetting::white_box:
      return craft_white_box(queries, pool, instruction, enc, n_a, cfg);
    default: break;
  }
  if (setting == AttackSetting::variant_hi) require_pool(pool, n_a);
  std::vector<MaliciousText> out(queries.size() * static_cast<std::size_t>(n_a));
  parallel_for(queries.size(), [&](std::size_t qi) {
    for (int j = 1; j <= n_a; ++j) {
      MaliciousText& m = out[qi * n_a + (j - 1)];
      switch (setting) {
        case AttackSetting::prompt_injection:
          m = craft_prompt_injection_baseline(queries[qi], instruction, j);
          break;
        case AttackSetting::variant_hi:
          m = craft_variant(VariantKind::H_I, queries[qi], pool, instruction, enc, j);
          break;
        default:
          m = craft_variant(VariantKind::R_I, queries[qi], pool, instruction, enc, j);
          break;
      }
    }
  });
  return out;
}

}  // namespace ragjack
