#include "ragjack/defense.hpp"

#include <fstream>
#include <istream>

#include "ragjack/error.hpp"
#include "ragjack/text.hpp"

namespace ragjack {

namespace {

constexpr std::string_view kDefaultParaphraseInstruction =
    "Paraphrase the following question without changing its meaning. Reply with the paraphrased "
    "question only.";

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

void check_entry(const std::string& key, const std::string& value) {
  const auto kw = split_words(key);
  const auto vw = split_words(value);
  if (kw.size() != 1 || kw.front() != key) {
    throw ValidationError("synonym key '" + key + "' must be a single lowercase word");
  }
  if (vw.empty()) throw ValidationError("synonym for '" + key + "' is empty");
  if (value == key) throw ValidationError("synonym table maps '" + key + "' to itself");
}

}  // namespace

std::string to_string(ParaphraserKind k) {
  switch (k) {
    case ParaphraserKind::identity: return "identity";
    case ParaphraserKind::synonym_table: return "synonym_table";
    case ParaphraserKind::http: return "http";
  }
  return "identity";
}

Paraphraser Paraphraser::identity() { return Paraphraser(); }

Paraphraser Paraphraser::synonym_table(SynonymTable table) {
  for (const auto& [k, v] : table) check_entry(k, v);
  Paraphraser p;
  p.kind_ = ParaphraserKind::synonym_table;
  p.table_ = std::move(table);
  return p;
}

Paraphraser Paraphraser::http(HttpSpec spec, std::string instruction) {
  Paraphraser p;
  p.kind_ = ParaphraserKind::http;
  p.client_ = std::make_shared<const ChatClient>(std::move(spec));
  p.instruction_ = instruction.empty() ? std::string(kDefaultParaphraseInstruction) : instruction;
  return p;
}

std::string Paraphraser::paraphrase(std::string_view query) const {
  switch (kind_) {
    case ParaphraserKind::identity: return std::string(query);
    case ParaphraserKind::http: return client_->complete(instruction_, std::string(query));
    case ParaphraserKind::synonym_table: break;
  }
  std::string out;
  out.reserve(query.size());
  std::size_t i = 0;
  while (i < query.size()) {
    if (!is_word_byte(static_cast<unsigned char>(query[i]))) {
      out.push_back(query[i++]);
      continue;
    }
    std::size_t j = i;
    while (j < query.size() && is_word_byte(static_cast<unsigned char>(query[j]))) ++j;
    const std::string_view word = query.substr(i, j - i);
    const std::string lower = to_lower(word);
    if (auto it = table_.find(lower); it != table_.end()) {
      out += it->second;
    } else {
      out.append(word);
    }
    i = j;
  }
  return out;
}

bool Paraphraser::is_idempotent() const {
  if (kind_ == ParaphraserKind::identity) return true;
  if (kind_ == ParaphraserKind::http) return false;
  for (const auto& [k, v] : table_) {
    for (const auto& w : split_words(v)) {
      if (table_.count(w)) return false;
    }
  }
  return true;
}

SynonymTable parse_synonym_table(std::istream& in, const std::string& source) {
  SynonymTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(source, line_no, "expected word<TAB>synonym");
    std::string key = to_lower(line.substr(0, tab));
    std::string value = line.substr(tab + 1);
    try {
      check_entry(key, value);
    } catch (const ValidationError& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (!table.emplace(std::move(key), std::move(value)).second) {
      throw ParseError(source, line_no, "duplicate synonym key");
    }
  }
  return table;
}

SynonymTable load_synonym_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open synonym table '" + path.string() + "'");
  return parse_synonym_table(in, path.string());
}

std::string format_synonym_table(const SynonymTable& table) {
  std::string out;
  for (const auto& [k, v] : table) out += k + "\t" + v + "\n";
  return out;
}

}  // namespace ragjack
