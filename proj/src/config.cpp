#include "ragjack/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "ragjack/corpus.hpp"
#include "ragjack/datasets.hpp"
#include "ragjack/error.hpp"

namespace ragjack {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  T out{};
  const char* first = v.data();
  const char* last = v.data() + v.size();
  std::from_chars_result r{};
  if constexpr (std::is_floating_point_v<T>) {
    char* end = nullptr;
    out = static_cast<T>(std::strtod(v.c_str(), &end));
    if (v.empty() || end != v.c_str() + v.size()) {
      throw ConfigError("config key '" + key + "': expected a number, got '" + raw + "'");
    }
    return out;
  } else {
    r = std::from_chars(first, last, out);
    if (v.empty() || r.ec != std::errc() || r.ptr != last) {
      throw ConfigError("config key '" + key + "': expected an integer, got '" + raw + "'");
    }
    return out;
  }
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + raw + "'");
}

std::size_t parse_positive(const std::string& key, const std::string& raw) {
  const auto v = parse_number<long long>(key, raw);
  if (v < 1) throw ConfigError("config key '" + key + "' must be >= 1");
  return static_cast<std::size_t>(v);
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"data.corpus", [](auto& c, auto&, auto& v) { c.corpus = trim(v); }},
      {"data.queries", [](auto& c, auto&, auto& v) { c.queries = trim(v); }},
      {"data.non_target_queries", [](auto& c, auto&, auto& v) { c.non_target_queries = trim(v); }},
      {"data.pool",
       [](auto& c, auto&, auto& v) { c.pool = trim(v) == "bundled" ? "" : trim(v); }},
      {"data.instructions",
       [](auto& c, auto&, auto& v) { c.instructions = trim(v) == "bundled" ? "" : trim(v); }},
      {"data.synonyms",
       [](auto& c, auto&, auto& v) { c.synonyms = trim(v) == "bundled" ? "" : trim(v); }},
      {"data.instruction_id", [](auto& c, auto&, auto& v) { c.instruction_id = trim(v); }},
      {"encoder.seed",
       [](auto& c, auto& k, auto& v) { c.encoder.seed = parse_number<std::uint64_t>(k, v); }},
      {"encoder.dim", [](auto& c, auto& k, auto& v) { c.encoder.dim = parse_positive(k, v); }},
      {"encoder.similarity",
       [](auto& c, auto&, auto& v) { c.similarity = similarity_kind_from_string(trim(v)); }},
      {"encoder.passage_mix",
       [](auto& c, auto& k, auto& v) { c.encoder.passage_mix = parse_number<double>(k, v); }},
      {"retrieval.k", [](auto& c, auto& k, auto& v) { c.k = parse_positive(k, v); }},
      {"attack.setting",
       [](auto& c, auto&, auto& v) { c.setting = attack_setting_from_string(trim(v)); }},
      {"attack.n_a",
       [](auto& c, auto& k, auto& v) { c.n_a = static_cast<int>(parse_positive(k, v)); }},
      {"attack.curate", [](auto& c, auto& k, auto& v) { c.curate = parse_bool(k, v); }},
      {"attack.max_len", [](auto& c, auto& k, auto& v) { c.max_len = parse_positive(k, v); }},
      {"attack.dedup_threshold",
       [](auto& c, auto& k, auto& v) { c.dedup_threshold = parse_number<double>(k, v); }},
      {"hotflip.max_iterations",
       [](auto& c, auto& k, auto& v) { c.hotflip.max_iterations = parse_number<int>(k, v); }},
      {"hotflip.positions_per_iteration",
       [](auto& c, auto& k, auto& v) {
         c.hotflip.positions_per_iteration = parse_number<int>(k, v);
       }},
      {"hotflip.patience",
       [](auto& c, auto& k, auto& v) { c.hotflip.patience = parse_number<int>(k, v); }},
      {"hotflip.schedule",
       [](auto& c, auto&, auto& v) { c.hotflip.schedule = position_schedule_from_string(trim(v)); }},
      {"generator.kind",
       [](auto& c, auto&, auto& v) { c.generator = generator_kind_from_string(trim(v)); }},
      {"generator.precedence",
       [](auto& c, auto&, auto& v) { c.precedence = precedence_from_string(trim(v)); }},
      {"generator.endpoint", [](auto& c, auto&, auto& v) { c.http.endpoint = trim(v); }},
      {"generator.model", [](auto& c, auto&, auto& v) { c.http.model = trim(v); }},
      {"generator.temperature",
       [](auto& c, auto& k, auto& v) { c.http.temperature = parse_number<double>(k, v); }},
      {"generator.timeout",
       [](auto& c, auto& k, auto& v) { c.http.timeout_seconds = parse_number<int>(k, v); }},
      {"generator.api_key_env", [](auto& c, auto&, auto& v) { c.http.api_key_env = trim(v); }},
      {"generator.parallel_requests",
       [](auto& c, auto& k, auto& v) {
         c.http.max_parallel_requests = static_cast<int>(parse_positive(k, v));
       }},
      {"evaluation.match",
       [](auto& c, auto&, auto& v) { c.match = match_rule_from_string(trim(v)); }},
      {"defense.expansion_k",
       [](auto& c, auto& k, auto& v) {
         c.expansion_k.clear();
         for (const auto& item : split_list(v)) c.expansion_k.push_back(parse_positive(k, item));
       }},
      {"transfer.encoders",
       [](auto& c, auto&, auto& v) { c.transfer_encoders = parse_encoder_list(v); }},
      {"run.out", [](auto& c, auto&, auto& v) { c.out = trim(v); }},
      {"run.seed", [](auto& c, auto& k, auto& v) { c.seed = parse_number<std::uint64_t>(k, v); }},
  };
  return table;
}

}  // namespace

std::vector<EncoderParams> parse_encoder_list(const std::string& spec) {
  std::vector<EncoderParams> out;
  for (const auto& item : split_list(spec)) {
    std::vector<std::string> parts;
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(trim(part));
    if (parts.empty() || parts.size() > 3) {
      throw ConfigError("encoder spec '" + item + "' must be seed[:dim[:passage_mix]]");
    }
    EncoderParams p;
    p.seed = parse_number<std::uint64_t>("transfer.encoders", parts[0]);
    if (parts.size() > 1) p.dim = parse_positive("transfer.encoders", parts[1]);
    if (parts.size() > 2) p.passage_mix = parse_number<double>("transfer.encoders", parts[2]);
    out.push_back(p);
  }
  return out;
}

void ExperimentConfig::set(const std::string& dotted_key, const std::string& value) {
  const auto& table = setters();
  auto it = table.find(dotted_key);
  if (it == table.end()) throw ConfigError("unknown config key '" + dotted_key + "'");
  it->second(*this, dotted_key, value);
}

ExperimentConfig ExperimentConfig::parse(const std::string& ini_text,
                                         const std::filesystem::path& base_dir) {
  pt::ptree tree;
  std::istringstream in(ini_text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("config key '" + section + "' must live inside a [section]");
    }
    for (const auto& [key, value] : body) cfg.set(section + "." + key, value.data());
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  auto base = std::filesystem::absolute(path).parent_path();
  return parse(ss.str(), base);
}

std::filesystem::path ExperimentConfig::resolve_path(const std::filesystem::path& p) const {
  if (p.empty() || p.is_absolute()) return p;
  return (base_dir / p).lexically_normal();
}

void ExperimentConfig::validate() const {
  if (k < 1) throw ConfigError("retrieval.k must be >= 1");
  if (n_a < 1) throw ConfigError("attack.n_a must be >= 1");
  if (!(dedup_threshold > 0.0 && dedup_threshold <= 1.0)) {
    throw ConfigError("attack.dedup_threshold must lie in (0, 1]");
  }
  if (!(encoder.passage_mix >= 0.0 && encoder.passage_mix <= 1.0)) {
    throw ConfigError("encoder.passage_mix must lie in [0, 1]");
  }
  if (!(http.temperature >= 0.0)) throw ConfigError("generator.temperature must be >= 0");
  hotflip.validate();
  if (corpus.empty()) throw ConfigError("data.corpus is required");
  if (queries.empty()) throw ConfigError("data.queries is required");
  auto must_exist = [&](const std::filesystem::path& p, const char* key) {
    if (!p.empty() && !std::filesystem::exists(resolve_path(p))) {
      throw ConfigError(std::string(key) + ": file '" + resolve_path(p).string() + "' not found");
    }
  };
  must_exist(corpus, "data.corpus");
  must_exist(queries, "data.queries");
  must_exist(non_target_queries, "data.non_target_queries");
  must_exist(pool, "data.pool");
  must_exist(instructions, "data.instructions");
  must_exist(synonyms, "data.synonyms");
}

std::string ExperimentConfig::to_ini() const {
  auto path_or = [&](const std::filesystem::path& p, const char* fallback) {
    return p.empty() ? std::string(fallback) : resolve_path(p).string();
  };
  std::ostringstream os;
  os << "[data]\n"
     << "corpus = " << path_or(corpus, "") << "\n"
     << "queries = " << path_or(queries, "") << "\n"
     << "non_target_queries = " << path_or(non_target_queries, "") << "\n"
     << "pool = " << path_or(pool, "bundled") << "\n"
     << "instructions = " << path_or(instructions, "bundled") << "\n"
     << "synonyms = " << path_or(synonyms, "bundled") << "\n"
     << "instruction_id = " << instruction_id << "\n\n"
     << "[encoder]\n"
     << "seed = " << encoder.seed << "\n"
     << "dim = " << encoder.dim << "\n"
     << "similarity = " << to_string(similarity) << "\n"
     << "passage_mix = " << fmt_double(encoder.passage_mix) << "\n\n"
     << "[retrieval]\n"
     << "k = " << k << "\n\n"
     << "[attack]\n"
     << "setting = " << to_string(setting) << "\n"
     << "n_a = " << n_a << "\n"
     << "curate = " << (curate ? "true" : "false") << "\n"
     << "max_len = " << max_len << "\n"
     << "dedup_threshold = " << fmt_double(dedup_threshold) << "\n\n"
     << "[hotflip]\n"
     << "max_iterations = " << hotflip.max_iterations << "\n"
     << "positions_per_iteration = " << hotflip.positions_per_iteration << "\n"
     << "patience = " << hotflip.patience << "\n"
     << "schedule = " << to_string(hotflip.schedule) << "\n\n"
     << "[generator]\n"
     << "kind = " << to_string(generator) << "\n"
     << "precedence = " << to_string(precedence) << "\n"
     << "endpoint = " << http.endpoint << "\n"
     << "model = " << http.model << "\n"
     << "temperature = " << fmt_double(http.temperature) << "\n"
     << "timeout = " << http.timeout_seconds << "\n"
     << "api_key_env = " << http.api_key_env << "\n"
     << "parallel_requests = " << http.max_parallel_requests << "\n\n"
     << "[evaluation]\n"
     << "match = " << to_string(match) << "\n\n"
     << "[defense]\n"
     << "expansion_k = ";
  for (std::size_t i = 0; i < expansion_k.size(); ++i) os << (i ? "," : "") << expansion_k[i];
  os << "\n\n[transfer]\nencoders = ";
  for (std::size_t i = 0; i < transfer_encoders.size(); ++i) {
    const auto& e = transfer_encoders[i];
    os << (i ? "," : "") << e.seed << ":" << e.dim << ":" << fmt_double(e.passage_mix);
  }
  os << "\n\n[run]\n"
     << "out = " << resolve_path(out).string() << "\n"
     << "seed = " << seed << "\n";
  return os.str();
}

Experiment ExperimentConfig::resolve() const {
  validate();
  Experiment ex;
  ex.corpus = CorpusStore::ingest_jsonl(resolve_path(corpus));
  ex.queries = load_queries(resolve_path(queries));
  if (!non_target_queries.empty()) ex.non_targets = load_queries(resolve_path(non_target_queries));

  std::vector<HijackText> raw = pool.empty() ? bundled_hijack_pool() : load_hijack_pool(resolve_path(pool));
  ex.pool = curate ? curate_pool(raw, max_len, dedup_threshold, fit_pool_model(raw)) : raw;

  ex.instructions = instructions.empty() ? bundled_instructions()
                                         : load_instructions(resolve_path(instructions));
  ex.instruction = find_instruction(ex.instructions, instruction_id);

  ex.encoder = encoder;
  ex.similarity = similarity;
  ex.k = k;
  ex.n_a = n_a;
  ex.setting = setting;
  ex.hotflip = hotflip;
  ex.match = match;
  ex.seed = seed;
  ex.generator.kind = generator;
  ex.generator.http = http;
  ex.generator.oracle = make_oracle_rules(ex.pool, ex.instructions, precedence);
  ex.validate();
  return ex;
}

}  // namespace ragjack
