#include "ragjack/text.hpp"

#include <algorithm>
#include <map>

#include "ragjack/error.hpp"

namespace ragjack {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

char lower_ascii(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

}  // namespace

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      current.push_back(lower_ascii(c));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

Vocabulary::Vocabulary() : tokens_{std::string(kUnknownTokenText)} {
  index_.emplace(tokens_.front(), kUnknownToken);
}

Vocabulary Vocabulary::build(std::span<const std::string> texts, std::size_t min_count) {
  if (min_count == 0) throw ConfigError("vocabulary min_count must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& text : texts) {
    for (auto& w : split_words(text)) ++counts[std::move(w)];
  }
  std::vector<std::string> kept;
  for (auto& [word, n] : counts) {
    if (n >= min_count) kept.push_back(word);
  }
  return from_tokens(std::move(kept));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  std::sort(tokens.begin(), tokens.end());
  if (std::adjacent_find(tokens.begin(), tokens.end()) != tokens.end()) {
    throw ValidationError("vocabulary tokens must be unique");
  }
  Vocabulary vocab;
  vocab.tokens_.reserve(tokens.size() + 1);
  for (auto& t : tokens) {
    if (t == kUnknownTokenText) continue;
    const auto id = static_cast<TokenId>(vocab.tokens_.size());
    vocab.index_.emplace(t, id);
    vocab.tokens_.push_back(std::move(t));
  }
  return vocab;
}

TokenId Vocabulary::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnknownToken : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.find(std::string(token)) != index_.end();
}

TokenSequence tokenize(const Vocabulary& vocab, std::string_view text) {
  TokenSequence seq;
  seq.source = std::string(text);
  seq.words = split_words(text);
  seq.ids.reserve(seq.words.size());
  for (const auto& w : seq.words) seq.ids.push_back(vocab.index_of(w));
  return seq;
}

std::string detokenize(const TokenSequence& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.words.size(); ++i) {
    if (i) out.push_back(' ');
    out += seq.words[i];
  }
  return out;
}

}  // namespace ragjack
