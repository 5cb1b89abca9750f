#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ragjack {

using TokenId = std::uint32_t;

/// Reserved index of the unknown token in every vocabulary.
inline constexpr TokenId kUnknownToken = 0;
inline constexpr std::string_view kUnknownTokenText = "[UNK]";

/// Lowercases ASCII letters, turns every other non-alphanumeric byte into a
/// separator and splits on whitespace. Bytes >= 0x80 are kept so UTF-8 words
/// survive intact.
std::vector<std::string> split_words(std::string_view text);

/// Dense token index: UNK at 0, then the known tokens in lexicographic order.
class Vocabulary {
 public:
  Vocabulary();

  /// Keeps tokens seen at least `min_count` times across `texts`.
  static Vocabulary build(std::span<const std::string> texts, std::size_t min_count = 1);

  /// Builds directly from a token list (UNK is prepended; duplicates are an error).
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  TokenId index_of(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

struct TokenSequence {
  std::vector<TokenId> ids;
  /// Surface form of each token after normalization, parallel to `ids`.
  std::vector<std::string> words;
  std::string source;

  std::size_t size() const noexcept { return ids.size(); }
  bool empty() const noexcept { return ids.empty(); }
};

TokenSequence tokenize(const Vocabulary& vocab, std::string_view text);

/// Space-joins the normalized words of a sequence.
std::string detokenize(const TokenSequence& seq);

}  // namespace ragjack
