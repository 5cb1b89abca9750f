#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ragjack/corpus.hpp"
#include "ragjack/encoder.hpp"

namespace ragjack {

/// Identifies what an index was built from; a sidecar is reused only on an exact match.
struct IndexKey {
  std::uint64_t corpus_hash = 0;
  std::uint64_t vocabulary_hash = 0;
  std::uint64_t seed = 0;
  std::size_t dim = 0;
  double passage_mix = 0.0;
  SimilarityKind kind = SimilarityKind::dot;

  bool operator==(const IndexKey&) const = default;
};

/// Passage embeddings of every document, in store order.
class RetrievalIndex {
 public:
  RetrievalIndex() = default;
  RetrievalIndex(std::vector<std::string> ids, Matrix embeddings, SimilarityKind kind,
                 IndexKey key);

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  std::size_t dim() const noexcept { return embeddings_.cols(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const Matrix& embeddings() const noexcept { return embeddings_; }
  std::span<const double> embedding(std::size_t i) const { return embeddings_.row(i); }
  SimilarityKind kind() const noexcept { return kind_; }
  const IndexKey& key() const noexcept { return key_; }

  bool operator==(const RetrievalIndex&) const = default;

 private:
  std::vector<std::string> ids_;
  Matrix embeddings_;
  SimilarityKind kind_ = SimilarityKind::dot;
  IndexKey key_;
};

struct RetrievedEntry {
  std::size_t rank = 0;  ///< 1-based
  std::string doc_id;
  double score = 0.0;

  bool operator==(const RetrievedEntry&) const = default;
};

struct RetrievalResult {
  std::string query_id;
  std::size_t k = 0;
  std::vector<RetrievedEntry> entries;

  std::vector<std::string> doc_ids() const;
  bool operator==(const RetrievalResult&) const = default;
};

IndexKey make_index_key(const CorpusStore& store, const TextEncoder& enc);

RetrievalIndex build_index(const CorpusStore& store, const TextEncoder& enc);

/// Loads `sidecar` when its key matches, otherwise builds and rewrites it.
RetrievalIndex build_index_cached(const CorpusStore& store, const TextEncoder& enc,
                                  const std::filesystem::path& sidecar);

void save_index(const RetrievalIndex& index, const std::filesystem::path& path);
/// Returns nullopt when the file is missing, unreadable or keyed differently.
std::optional<RetrievalIndex> load_index(const std::filesystem::path& path, const IndexKey& expected);

/// Top-k by score, ties broken by the lexicographically smaller id. Under
/// cosine, zero-vector passages are never returned and a zero query yields an
/// empty result.
RetrievalResult retrieve_top_k(const RetrievalIndex& index, std::span<const double> query_vec,
                               std::size_t k, std::string query_id = {});

RetrievalResult retrieve_top_k(const RetrievalIndex& index, std::string_view query,
                               const TextEncoder& enc, std::size_t k, std::string query_id = {});

}  // namespace ragjack
