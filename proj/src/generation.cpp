#include "ragjack/generation.hpp"

#include <algorithm>
#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "ragjack/error.hpp"

namespace ragjack {

namespace {

std::size_t count_of(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool contains_case_insensitive(std::string_view haystack, std::string_view needle) {
  return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

void PromptTemplate::validate() const {
  if (count_of(text, "{contexts}") != 1 || count_of(text, "{question}") != 1) {
    throw ConfigError("prompt template needs exactly one {contexts} and one {question}");
  }
}

std::string build_prompt(const PromptTemplate& tpl, std::string_view query,
                         std::span<const std::string> passages) {
  std::string contexts;
  for (std::size_t i = 0; i < passages.size(); ++i) {
    if (i) contexts += tpl.separator;
    contexts += passages[i];
  }
  // Substitute at positions found in the template itself so that braces inside
  // passages or the query are never reinterpreted.
  const auto cpos = tpl.text.find("{contexts}");
  const auto qpos = tpl.text.find("{question}");
  if (cpos == std::string::npos || qpos == std::string::npos) {
    throw ConfigError("prompt template needs {contexts} and {question}");
  }
  std::string out;
  if (cpos < qpos) {
    out = tpl.text.substr(0, cpos) + contexts +
          tpl.text.substr(cpos + 10, qpos - cpos - 10) + std::string(query) +
          tpl.text.substr(qpos + 10);
  } else {
    out = tpl.text.substr(0, qpos) + std::string(query) +
          tpl.text.substr(qpos + 10, cpos - qpos - 10) + contexts + tpl.text.substr(cpos + 10);
  }
  return out;
}

std::string to_string(GeneratorKind k) { return k == GeneratorKind::oracle ? "oracle" : "http"; }

GeneratorKind generator_kind_from_string(std::string_view name) {
  if (name == "oracle") return GeneratorKind::oracle;
  if (name == "http") return GeneratorKind::http;
  throw ConfigError("unknown generator kind '" + std::string(name) + "' (expected oracle|http)");
}

std::string to_string(Precedence p) {
  switch (p) {
    case Precedence::hijack_wins: return "hijack_wins";
    case Precedence::gold_wins: return "gold_wins";
    case Precedence::first_in_rank: return "first_in_rank";
  }
  return "hijack_wins";
}

Precedence precedence_from_string(std::string_view name) {
  if (name == "hijack_wins") return Precedence::hijack_wins;
  if (name == "gold_wins") return Precedence::gold_wins;
  if (name == "first_in_rank") return Precedence::first_in_rank;
  throw ConfigError("unknown oracle precedence '" + std::string(name) +
                    "' (expected hijack_wins|gold_wins|first_in_rank)");
}

std::vector<std::string> derive_hijack_markers(std::span<const HijackText> pool) {
  std::vector<std::string> markers;
  auto add = [&](std::string m) {
    m = trim(m);
    if (m.empty()) return;
    if (std::find(markers.begin(), markers.end(), m) == markers.end()) markers.push_back(m);
  };
  for (const auto& h : pool) {
    const auto pos = h.template_text.find(kInstructionPlaceholder);
    if (pos == std::string::npos) continue;
    std::string before = trim(h.template_text.substr(0, pos));
    if (!before.empty()) {
      add(before);
    } else {
      add(h.template_text.substr(pos + kInstructionPlaceholder.size()));
    }
  }
  add("ignore previous content");
  return markers;
}

OracleRules make_oracle_rules(std::span<const HijackText> pool,
                              std::span<const InstructionText> instructions,
                              Precedence precedence) {
  OracleRules rules;
  rules.hijack_markers = derive_hijack_markers(pool);
  rules.instructions.assign(instructions.begin(), instructions.end());
  rules.precedence = precedence;
  return rules;
}

void GeneratorSpec::validate() const {
  prompt.validate();
  if (kind == GeneratorKind::http) {
    if (!(http.temperature >= 0.0)) throw ConfigError("generator temperature must be >= 0");
    if (http.endpoint.empty()) throw ConfigError("http generator needs an endpoint");
    if (http.model.empty()) throw ConfigError("http generator needs a model name");
    if (http.timeout_seconds < 1) throw ConfigError("http generator timeout must be >= 1 s");
  }
}

OracleGenerator::OracleGenerator(OracleRules rules) : rules_(std::move(rules)) {
  for (const auto& m : rules_.hijack_markers) markers_lower_.push_back(to_lower(m));
  for (const auto& i : rules_.instructions) instructions_lower_.push_back(to_lower(i.template_text));
}

std::optional<std::size_t> OracleGenerator::hijack_in(std::string_view passage) const {
  const std::string lower = to_lower(passage);
  const bool marked = std::any_of(markers_lower_.begin(), markers_lower_.end(), [&](const auto& m) {
    return !m.empty() && lower.find(m) != std::string::npos;
  });
  if (!marked) return std::nullopt;
  for (std::size_t i = 0; i < instructions_lower_.size(); ++i) {
    if (!instructions_lower_[i].empty() && lower.find(instructions_lower_[i]) != std::string::npos) {
      return i;
    }
  }
  return std::nullopt;
}

std::string OracleGenerator::generate(const std::string& /*prompt*/, const TargetQuery& query,
                                      std::span<const std::string> contexts) const {
  auto hijack_answer = [&](std::size_t i) {
    const InstructionText& ins = rules_.instructions[i];
    return ins.expected_answer.empty() ? ins.template_text : ins.expected_answer;
  };
  auto is_gold = [&](const std::string& passage) {
    return query.ground_truth && !query.ground_truth->empty() &&
           contains_case_insensitive(passage, *query.ground_truth);
  };

  // A passage that both hijacks and contains the answer counts as a hijack.
  std::optional<std::size_t> hijack_rank, hijack_instruction, gold_rank;
  for (std::size_t r = 0; r < contexts.size(); ++r) {
    if (auto h = hijack_in(contexts[r])) {
      if (!hijack_rank) hijack_rank = r, hijack_instruction = h;
    } else if (!gold_rank && is_gold(contexts[r])) {
      gold_rank = r;
    }
  }
  bool take_hijack = false;
  switch (rules_.precedence) {
    case Precedence::hijack_wins: take_hijack = hijack_rank.has_value(); break;
    case Precedence::gold_wins: take_hijack = hijack_rank && !gold_rank; break;
    case Precedence::first_in_rank:
      take_hijack = hijack_rank && (!gold_rank || *hijack_rank < *gold_rank);
      break;
  }
  if (take_hijack) return hijack_answer(*hijack_instruction);
  if (gold_rank) return *query.ground_truth;
  return std::string(kRefusal);
}

ChatClient::ChatClient(HttpSpec spec) : spec_(std::move(spec)) {
  const auto scheme = spec_.endpoint.find("://");
  if (scheme == std::string::npos) {
    throw ConfigError("http endpoint '" + spec_.endpoint + "' must start with http:// or https://");
  }
  const auto slash = spec_.endpoint.find('/', scheme + 3);
  base_ = spec_.endpoint.substr(0, slash);
  path_ = slash == std::string::npos ? "/v1/chat/completions" : spec_.endpoint.substr(slash);
}

std::string ChatClient::complete(const std::string& system, const std::string& user) const {
  nlohmann::ordered_json body;
  body["model"] = spec_.model;
  body["messages"] = nlohmann::ordered_json::array(
      {{{"role", "system"}, {"content", system}}, {{"role", "user"}, {"content", user}}});
  body["temperature"] = spec_.temperature;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!spec_.api_key_env.empty()) {
    if (const char* key = std::getenv(spec_.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  httplib::Result res;
  try {
    httplib::Client client(base_);
    client.set_connection_timeout(spec_.timeout_seconds, 0);
    client.set_read_timeout(spec_.timeout_seconds, 0);
    client.set_write_timeout(spec_.timeout_seconds, 0);
    for (int attempt = 0; attempt < 2; ++attempt) {
      res = client.Post(path_, headers, payload, "application/json");
      if (res) break;
    }
  } catch (const std::exception& e) {
    throw GenerationError(spec_.endpoint, 0, e.what());
  }
  if (!res) throw GenerationError(spec_.endpoint, 0, "transport failure: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    throw GenerationError(spec_.endpoint, res->status, "non-2xx response");
  }
  try {
    const auto json = nlohmann::json::parse(res->body);
    return json.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw GenerationError(spec_.endpoint, res->status, std::string("malformed response: ") + e.what());
  }
}

HttpGenerator::HttpGenerator(HttpSpec spec) : client_(std::move(spec)) {}

std::string HttpGenerator::generate(const std::string& prompt, const TargetQuery& /*query*/,
                                    std::span<const std::string> /*contexts*/) const {
  return client_.complete(client_.spec().system_prompt, prompt);
}

std::size_t HttpGenerator::max_parallelism() const {
  return static_cast<std::size_t>(std::max(1, client_.spec().max_parallel_requests));
}

std::unique_ptr<Generator> make_generator(const GeneratorSpec& spec) {
  spec.validate();
  if (spec.kind == GeneratorKind::http) return std::make_unique<HttpGenerator>(spec.http);
  return std::make_unique<OracleGenerator>(spec.oracle);
}

}  // namespace ragjack
