#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "ragjack/generation.hpp"

namespace ragjack {

enum class ParaphraserKind { identity, synonym_table, http };
std::string to_string(ParaphraserKind k);

using SynonymTable = std::map<std::string, std::string, std::less<>>;

/// Rewrites target queries before retrieval.
class Paraphraser {
 public:
  static Paraphraser identity();
  /// Keys and values are single lowercase words; a key may not map to itself.
  static Paraphraser synonym_table(SynonymTable table);
  static Paraphraser http(HttpSpec spec, std::string instruction = {});

  ParaphraserKind kind() const noexcept { return kind_; }
  const SynonymTable& table() const noexcept { return table_; }

  /// identity: unchanged. synonym_table: every word with an entry is replaced,
  /// everything else (including punctuation and spacing) is kept. http: the
  /// endpoint's rewrite, verbatim.
  std::string paraphrase(std::string_view query) const;

  /// True when no synonym is itself a key, which makes paraphrase idempotent.
  bool is_idempotent() const;

 private:
  ParaphraserKind kind_ = ParaphraserKind::identity;
  SynonymTable table_;
  std::shared_ptr<const ChatClient> client_;
  std::string instruction_;
};

/// "word<TAB>synonym" per line; blank lines and lines starting with '#' are skipped.
SynonymTable parse_synonym_table(std::istream& in, const std::string& source);
SynonymTable load_synonym_table(const std::filesystem::path& path);
std::string format_synonym_table(const SynonymTable& table);

}  // namespace ragjack
