#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ragjack/malicious_text.hpp"

namespace ragjack {

enum class Provenance { clean, malicious };

struct Document {
  std::string id;
  std::string text;
  Provenance provenance = Provenance::clean;
  std::optional<std::string> origin_query_id;  ///< set iff malicious
  std::optional<int> origin_index;             ///< j in 1..N_a

  bool operator==(const Document&) const = default;
};

/// Immutable, insertion-ordered document store (C, or C u M after injection).
class CorpusStore {
 public:
  CorpusStore() = default;
  /// Throws DuplicateIdError / ValidationError on broken invariants.
  explicit CorpusStore(std::vector<Document> documents);

  /// JSONL with required "id"/"text"; optional provenance fields (absent = clean).
  static CorpusStore ingest_jsonl(const std::filesystem::path& path);
  static CorpusStore load(const std::filesystem::path& path) { return ingest_jsonl(path); }
  static CorpusStore parse_jsonl(std::istream& in, const std::string& source_name);

  void persist(const std::filesystem::path& path) const;
  /// Byte-exact serialization used by persist.
  std::string to_jsonl() const;

  /// New store with one malicious document per text appended, ids "mal-<qid>-<j>".
  CorpusStore inject(std::span<const MaliciousText> texts) const;

  std::size_t size() const noexcept { return docs_.size(); }
  bool empty() const noexcept { return docs_.empty(); }
  std::size_t clean_count() const noexcept { return clean_; }
  std::size_t malicious_count() const noexcept { return docs_.size() - clean_; }

  const std::vector<Document>& documents() const noexcept { return docs_; }
  const Document& operator[](std::size_t i) const { return docs_[i]; }
  const Document* find(std::string_view id) const;
  auto begin() const noexcept { return docs_.begin(); }
  auto end() const noexcept { return docs_.end(); }

  /// FNV-1a of to_jsonl(); keys index sidecars.
  std::uint64_t content_hash() const;

  bool operator==(const CorpusStore& other) const { return docs_ == other.docs_; }

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t clean_ = 0;
};

std::string to_string(Provenance p);

}  // namespace ragjack
