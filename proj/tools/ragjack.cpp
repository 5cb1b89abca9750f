// ragjack: command-line driver for retrieval prompt-hijack experiments.
//
//   ragjack synth    --out DIR [--seed N] [--n-docs N] [--n-queries N] [--n-non-target N]
//   ragjack craft    --config FILE [--setting S] [overrides]
//   ragjack inject   --config FILE [--texts FILE] [overrides]
//   ragjack eval     --config FILE [overrides]
//   ragjack transfer --config FILE --encoders 1:768,2:768 [overrides]
//   ragjack defend   paraphrase|expand --config FILE [--paraphraser KIND] [--k-values 5,10,20,50]
//
// Exit codes: 0 ok, 2 configuration or usage error, 3 runtime error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ragjack/config.hpp"
#include "ragjack/datasets.hpp"
#include "ragjack/error.hpp"
#include "ragjack/evaluation.hpp"
#include "ragjack/synth.hpp"

namespace fs = std::filesystem;
using namespace ragjack;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> k;
  std::optional<int> n_a;
  std::string setting;
  std::string generator;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config,-c", f.config, "experiment INI file")->required();
  cmd->add_option("--seed", f.seed, "global run seed");
  cmd->add_option("--out,-o", f.out, "output directory");
  cmd->add_option("--k", f.k, "retrieval depth");
  cmd->add_option("--n-a", f.n_a, "malicious texts per target query");
  cmd->add_option("--setting", f.setting,
                  "none|black_box|white_box|prompt_injection|variant_HI|variant_RI");
  cmd->add_option("--generator", f.generator, "oracle|http");
  cmd->add_option("--set", f.overrides, "override a config key: section.key=value");
}

ExperimentConfig load_config(const CommonFlags& f) {
  ExperimentConfig cfg = ExperimentConfig::load(f.config);
  for (const auto& o : f.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + o + "'");
    cfg.set(o.substr(0, eq), o.substr(eq + 1));
  }
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.out = fs::absolute(f.out);
  if (f.k) cfg.set("retrieval.k", std::to_string(*f.k));
  if (f.n_a) cfg.set("attack.n_a", std::to_string(*f.n_a));
  if (!f.setting.empty()) cfg.set("attack.setting", f.setting);
  if (!f.generator.empty()) cfg.set("generator.kind", f.generator);
  return cfg;
}

void write(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

fs::path out_dir(const ExperimentConfig& cfg) { return cfg.resolve_path(cfg.out); }

struct Pipeline {
  Experiment ex;
  std::shared_ptr<const Vocabulary> vocab;
  std::optional<TextEncoder> enc;
};

Pipeline prepare(const ExperimentConfig& cfg) {
  Pipeline p{cfg.resolve(), nullptr, std::nullopt};
  p.vocab = build_experiment_vocabulary(p.ex);
  p.enc.emplace(make_text_encoder(p.vocab, p.ex.encoder, p.ex.similarity));
  return p;
}

std::string craft_log_csv(const std::vector<WhiteBoxTrace>& trace) {
  std::ostringstream os;
  os.precision(10);
  os << "query_id,j,black_box_similarity,white_box_similarity,accepted_flips\n";
  for (const auto& t : trace) {
    os << t.query_id << "," << t.j << "," << t.black_box_similarity << ","
       << t.white_box_similarity << "," << t.accepted_flips << "\n";
  }
  return os.str();
}

int cmd_synth(const fs::path& out, const SynthConfig& sc) {
  const SynthDataset data = generate_synthetic(sc);
  write_synthetic(data, out, sc);
  std::cout << "wrote " << data.corpus.size() << " documents, " << data.targets.size()
            << " target and " << data.non_targets.size() << " non-target queries to "
            << out.string() << "\n";
  return 0;
}

int cmd_craft(const ExperimentConfig& cfg) {
  Pipeline p = prepare(cfg);
  const fs::path dir = out_dir(cfg);
  std::vector<MaliciousText> texts;
  if (p.ex.setting == AttackSetting::white_box) {
    std::vector<WhiteBoxTrace> trace;
    texts = craft_white_box(p.ex.queries, p.ex.pool, p.ex.instruction, *p.enc, p.ex.n_a,
                            p.ex.hotflip, &trace);
    write(dir / "craft_log.csv", craft_log_csv(trace));
  } else {
    texts = craft_for(p.ex, *p.enc);
  }
  write(dir / "config.ini", cfg.to_ini());
  write(dir / "crafted.jsonl", malicious_texts_to_jsonl(texts));
  std::cout << "crafted " << texts.size() << " texts (" << to_string(p.ex.setting) << ") -> "
            << (dir / "crafted.jsonl").string() << "\n";
  return 0;
}

int cmd_inject(const ExperimentConfig& cfg, const std::string& texts_path) {
  Pipeline p = prepare(cfg);
  const fs::path dir = out_dir(cfg);
  const std::vector<MaliciousText> texts =
      texts_path.empty() ? craft_for(p.ex, *p.enc) : load_malicious_texts(texts_path);
  const CorpusStore poisoned = p.ex.corpus.inject(texts);
  write(dir / "config.ini", cfg.to_ini());
  poisoned.persist(dir / "poisoned_corpus.jsonl");
  std::cout << "injected " << poisoned.malicious_count() << " texts into "
            << poisoned.clean_count() << " clean documents -> "
            << (dir / "poisoned_corpus.jsonl").string() << "\n";
  return 0;
}

void print_report(const AttackReport& r) {
  std::cout << "setting=" << r.setting << " queries=" << r.outcomes.size() << " ASR=" << r.asr
            << " precision=" << r.mean_precision << " recall=" << r.mean_recall
            << " F1=" << r.mean_f1 << " accuracy=" << r.accuracy
            << " fingerprint=" << r.fingerprint.hash << "\n";
}

int cmd_eval(const ExperimentConfig& cfg) {
  Pipeline p = prepare(cfg);
  const fs::path dir = out_dir(cfg);
  const auto texts = craft_for(p.ex, *p.enc);
  const CorpusStore poisoned = p.ex.corpus.inject(texts);
  const RetrievalIndex index = build_index(poisoned, *p.enc);
  std::vector<std::string> questions;
  for (const auto& q : p.ex.queries) questions.push_back(q.question);
  const AttackReport report =
      evaluate_poisoned(p.ex, poisoned, index, *p.enc, questions, p.ex.k, make_fingerprint(p.ex));
  write(dir / "config.ini", cfg.to_ini());
  write(dir / "crafted.jsonl", malicious_texts_to_jsonl(texts));
  write(dir / "report.json", report.to_json());
  write(dir / "report.csv", report.to_csv());
  print_report(report);
  if (!p.ex.non_targets.empty()) {
    const LeakageReport leak = check_leakage_on(poisoned, index, *p.enc, p.ex.non_targets, p.ex.k);
    write(dir / "leakage.json", leak.to_json());
    std::cout << "non-target leakage: " << leak.leaking_queries << "/" << leak.checked_queries
              << "\n";
  }
  return 0;
}

int cmd_transfer(const ExperimentConfig& cfg, const std::string& encoders) {
  std::vector<EncoderParams> list =
      encoders.empty() ? cfg.transfer_encoders : parse_encoder_list(encoders);
  if (list.size() < 2) throw ConfigError("transfer needs at least two encoders (--encoders)");
  const Experiment ex = cfg.resolve();
  const TransferMatrix m = run_transfer_experiment(ex, list);
  const fs::path dir = out_dir(cfg);
  write(dir / "config.ini", cfg.to_ini());
  write(dir / "transfer.json", m.to_json());
  write(dir / "transfer.csv", m.to_csv());
  std::cout << m.to_csv();
  return 0;
}

int cmd_defend(const ExperimentConfig& cfg, const std::string& mode, const std::string& kind,
               const std::string& k_values) {
  const Experiment ex = cfg.resolve();
  const fs::path dir = out_dir(cfg);
  if (mode == "paraphrase") {
    Paraphraser para = Paraphraser::identity();
    if (kind == "synonym_table") {
      para = Paraphraser::synonym_table(cfg.synonyms.empty() ? bundled_synonyms()
                                                             : load_synonym_table(cfg.resolve_path(cfg.synonyms)));
    } else if (kind == "http") {
      para = Paraphraser::http(cfg.http);
    } else if (kind != "identity") {
      throw ConfigError("unknown paraphraser '" + kind + "' (expected identity|synonym_table|http)");
    }
    const AttackReport report = run_defense_paraphrase(ex, para);
    write(dir / "config.ini", cfg.to_ini());
    write(dir / "report.json", report.to_json());
    write(dir / "report.csv", report.to_csv());
    print_report(report);
    return 0;
  }
  std::vector<std::size_t> ks = cfg.expansion_k;
  if (!k_values.empty()) {
    ExperimentConfig tmp = cfg;
    tmp.set("defense.expansion_k", k_values);
    ks = tmp.expansion_k;
  }
  const ExpansionCurve curve = run_defense_expansion(ex, ks);
  write(dir / "config.ini", cfg.to_ini());
  write(dir / "expansion.json", curve.to_json());
  write(dir / "expansion.csv", curve.to_csv());
  std::cout << curve.to_csv();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retrieval prompt-hijack experiments on a toy RAG pipeline"};
  app.require_subcommand(1);

  std::string synth_out = "synthetic";
  SynthConfig sc;
  auto* synth = app.add_subcommand("synth", "write the deterministic synthetic corpus and query sets");
  synth->add_option("--out,-o", synth_out, "output directory");
  synth->add_option("--seed", sc.seed, "generator seed");
  synth->add_option("--n-docs", sc.n_docs, "clean documents");
  synth->add_option("--n-queries", sc.n_queries, "target queries");
  synth->add_option("--n-non-target", sc.n_non_target, "non-target queries");

  CommonFlags craft_f, inject_f, eval_f, transfer_f, defend_f;
  auto* craft = app.add_subcommand("craft", "craft malicious texts");
  add_common(craft, craft_f);

  std::string texts_path;
  auto* inject = app.add_subcommand("inject", "inject malicious texts and write the poisoned corpus");
  add_common(inject, inject_f);
  inject->add_option("--texts", texts_path, "crafted.jsonl to inject instead of crafting");

  auto* eval = app.add_subcommand("eval", "run the end-to-end attack experiment");
  add_common(eval, eval_f);

  std::string encoders;
  auto* transfer = app.add_subcommand("transfer", "evaluate transfer across encoders");
  add_common(transfer, transfer_f);
  transfer->add_option("--encoders", encoders, "seed:dim[,seed:dim...]");

  std::string mode, paraphraser = "synonym_table", k_values;
  auto* defend = app.add_subcommand("defend", "evaluate a defense");
  add_common(defend, defend_f);
  defend->add_option("mode", mode, "paraphrase|expand")
      ->required()
      ->check(CLI::IsMember({"paraphrase", "expand"}));
  defend->add_option("--paraphraser", paraphraser, "identity|synonym_table|http");
  defend->add_option("--k-values", k_values, "comma-separated k list for expand");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_out, sc);
    if (craft->parsed()) return cmd_craft(load_config(craft_f));
    if (inject->parsed()) return cmd_inject(load_config(inject_f), texts_path);
    if (eval->parsed()) return cmd_eval(load_config(eval_f));
    if (transfer->parsed()) return cmd_transfer(load_config(transfer_f), encoders);
    if (defend->parsed()) return cmd_defend(load_config(defend_f), mode, paraphraser, k_values);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
