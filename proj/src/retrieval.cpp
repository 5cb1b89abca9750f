#include "ragjack/retrieval.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <queue>

#include "ragjack/error.hpp"
#include "ragjack/hash.hpp"
#include "ragjack/parallel.hpp"

namespace ragjack {

namespace {

constexpr char kMagic[8] = {'R', 'J', 'I', 'D', 'X', '0', '0', '1'};

struct Candidate {
  double score;
  std::size_t doc;
};

std::uint64_t vocabulary_hash(const Vocabulary& vocab) {
  std::uint64_t h = fnv1a64("");
  for (const auto& t : vocab.tokens()) {
    h = fnv1a64(t, h);
    h = fnv1a64(std::string_view("\n", 1), h);
  }
  return h;
}

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
bool get(std::ifstream& in, T& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof v));
}

}  // namespace

RetrievalIndex::RetrievalIndex(std::vector<std::string> ids, Matrix embeddings, SimilarityKind kind,
                               IndexKey key)
    : ids_(std::move(ids)), embeddings_(std::move(embeddings)), kind_(kind), key_(key) {
  if (ids_.size() != embeddings_.rows()) {
    throw ValidationError("retrieval index: one embedding per document required");
  }
}

std::vector<std::string> RetrievalResult::doc_ids() const {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.doc_id);
  return out;
}

IndexKey make_index_key(const CorpusStore& store, const TextEncoder& enc) {
  IndexKey key;
  key.corpus_hash = store.content_hash();
  key.vocabulary_hash = vocabulary_hash(enc.vocabulary());
  key.seed = enc.encoder().params().seed;
  key.dim = enc.encoder().dim();
  key.passage_mix = enc.encoder().params().passage_mix;
  key.kind = enc.kind();
  return key;
}

RetrievalIndex build_index(const CorpusStore& store, const TextEncoder& enc) {
  const std::size_t n = store.size();
  const std::size_t d = enc.encoder().dim();
  Matrix emb(n, d);
  std::vector<std::string> ids(n);
  parallel_for(n, [&](std::size_t i) {
    ids[i] = store[i].id;
    const Vector v = enc.embed_passage(store[i].text);
    std::copy(v.begin(), v.end(), emb.row(i).begin());
  });
  return RetrievalIndex(std::move(ids), std::move(emb), enc.kind(), make_index_key(store, enc));
}

void save_index(const RetrievalIndex& index, const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open index sidecar '" + path.string() + "' for writing");
  const IndexKey& k = index.key();
  out.write(kMagic, sizeof kMagic);
  put(out, k.corpus_hash);
  put(out, k.vocabulary_hash);
  put(out, k.seed);
  put(out, static_cast<std::uint64_t>(k.dim));
  put(out, k.passage_mix);
  put(out, static_cast<std::uint8_t>(k.kind));
  put(out, static_cast<std::uint64_t>(index.size()));
  for (const auto& id : index.ids()) {
    put(out, static_cast<std::uint64_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  const auto& data = index.embeddings().data();
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!out) throw IoError("write failed for index sidecar '" + path.string() + "'");
}

std::optional<RetrievalIndex> load_index(const std::filesystem::path& path,
                                         const IndexKey& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    return std::nullopt;
  }
  IndexKey key;
  std::uint64_t dim = 0, n = 0;
  std::uint8_t kind = 0;
  if (!get(in, key.corpus_hash) || !get(in, key.vocabulary_hash) || !get(in, key.seed) ||
      !get(in, dim) || !get(in, key.passage_mix) || !get(in, kind) || !get(in, n)) {
    return std::nullopt;
  }
  key.dim = dim;
  key.kind = kind == 0 ? SimilarityKind::dot : SimilarityKind::cosine;
  if (!(key == expected)) return std::nullopt;
  std::vector<std::string> ids(n);
  for (auto& id : ids) {
    std::uint64_t len = 0;
    if (!get(in, len) || len > (1u << 20)) return std::nullopt;
    id.resize(len);
    if (!in.read(id.data(), static_cast<std::streamsize>(len))) return std::nullopt;
  }
  Matrix emb(n, dim);
  auto& data = emb.data();
  if (!in.read(reinterpret_cast<char*>(data.data()),
               static_cast<std::streamsize>(data.size() * sizeof(double)))) {
    return std::nullopt;
  }
  return RetrievalIndex(std::move(ids), std::move(emb), key.kind, key);
}

RetrievalIndex build_index_cached(const CorpusStore& store, const TextEncoder& enc,
                                  const std::filesystem::path& sidecar) {
  const IndexKey key = make_index_key(store, enc);
  if (auto cached = load_index(sidecar, key)) return std::move(*cached);
  RetrievalIndex index = build_index(store, enc);
  save_index(index, sidecar);
  return index;
}

RetrievalResult retrieve_top_k(const RetrievalIndex& index, std::span<const double> query_vec,
                               std::size_t k, std::string query_id) {
  if (k == 0) throw ConfigError("retrieval k must be >= 1");
  RetrievalResult result;
  result.query_id = std::move(query_id);
  result.k = k;
  if (index.empty()) return result;
  if (query_vec.size() != index.dim()) throw ValidationError("query/index dimension mismatch");

  const bool cosine = index.kind() == SimilarityKind::cosine;
  const double qn = cosine ? norm(query_vec) : 1.0;
  if (cosine && qn == 0.0) return result;

  const auto& ids = index.ids();
  // "better" = higher score, then smaller id. The heap top is the worst kept candidate.
  auto better = [&](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return ids[a.doc] < ids[b.doc];
  };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(better)> heap(better);
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto p = index.embedding(i);
    double s = dot(query_vec, p);
    if (cosine) {
      const double pn = norm(p);
      if (pn == 0.0) continue;
      s /= qn * pn;
    }
    Candidate c{s, i};
    if (heap.size() < k) {
      heap.push(c);
    } else if (better(c, heap.top())) {
      heap.pop();
      heap.push(c);
    }
  }
  std::vector<Candidate> kept;
  kept.reserve(heap.size());
  while (!heap.empty()) {
    kept.push_back(heap.top());
    heap.pop();
  }
  std::reverse(kept.begin(), kept.end());
  result.entries.reserve(kept.size());
  for (std::size_t r = 0; r < kept.size(); ++r) {
    result.entries.push_back({r + 1, ids[kept[r].doc], kept[r].score});
  }
  return result;
}

RetrievalResult retrieve_top_k(const RetrievalIndex& index, std::string_view query,
                               const TextEncoder& enc, std::size_t k, std::string query_id) {
  return retrieve_top_k(index, enc.embed_query(query), k, std::move(query_id));
}

}  // namespace ragjack
