#include "ragjack/encoder.hpp"

#include <cmath>
#include <random>

#include "ragjack/error.hpp"

namespace ragjack {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kQueryTable = 0;
constexpr std::uint64_t kPassageTable = 1;

Vector mean_rows(const Matrix& table, std::span<const TokenId> tokens) {
  Vector out(table.cols(), 0.0);
  if (tokens.empty()) return out;
  for (TokenId t : tokens) {
    auto r = table.row(t);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += r[c];
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (double& v : out) v *= inv;
  return out;
}

}  // namespace

std::string to_string(SimilarityKind kind) {
  return kind == SimilarityKind::dot ? "dot" : "cosine";
}

SimilarityKind similarity_kind_from_string(std::string_view name) {
  if (name == "dot") return SimilarityKind::dot;
  if (name == "cosine") return SimilarityKind::cosine;
  throw ConfigError("unknown similarity kind '" + std::string(name) + "' (expected dot|cosine)");
}

void fill_embedding_row(std::uint64_t seed, std::uint64_t table, std::uint64_t row,
                        std::span<double> out) {
  const std::uint64_t key = splitmix64(splitmix64(splitmix64(seed) ^ table) ^ row);
  std::mt19937_64 gen(key);
  for (double& v : out) {
    const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    v = 2.0 * unit - 1.0;
  }
}

DualEncoder::DualEncoder(std::size_t vocab_size, EncoderParams params)
    : params_(params), query_(vocab_size, params.dim), passage_(vocab_size, params.dim) {
  if (params.dim == 0) throw ConfigError("encoder dimension must be positive");
  if (!(params.passage_mix >= 0.0 && params.passage_mix <= 1.0)) {
    throw ConfigError("encoder passage_mix must lie in [0, 1]");
  }
  std::vector<double> scratch(params.dim);
  for (std::size_t r = 0; r < vocab_size; ++r) {
    fill_embedding_row(params.seed, kQueryTable, r, query_.row(r));
    auto p = passage_.row(r);
    auto q = query_.row(r);
    if (params.passage_mix == 0.0) {
      std::copy(q.begin(), q.end(), p.begin());
    } else {
      fill_embedding_row(params.seed, kPassageTable, r, scratch);
      const double a = params.passage_mix;
      for (std::size_t c = 0; c < params.dim; ++c) p[c] = (1.0 - a) * q[c] + a * scratch[c];
    }
  }
}

DualEncoder::DualEncoder(Matrix query_table, Matrix passage_table)
    : query_(std::move(query_table)), passage_(std::move(passage_table)) {
  if (query_.rows() != passage_.rows() || query_.cols() != passage_.cols()) {
    throw ValidationError("query and passage tables must have identical shape");
  }
  if (query_.cols() == 0) throw ValidationError("encoder tables must have at least one column");
  params_.dim = query_.cols();
}

Vector DualEncoder::encode_query(std::span<const TokenId> tokens) const {
  return mean_rows(query_, tokens);
}

Vector DualEncoder::encode_passage(std::span<const TokenId> tokens) const {
  return mean_rows(passage_, tokens);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double similarity(std::span<const double> q, std::span<const double> p, SimilarityKind kind) {
  if (q.size() != p.size()) throw ValidationError("similarity: dimension mismatch");
  const double d = dot(q, p);
  if (kind == SimilarityKind::dot) return d;
  const double nq = norm(q);
  const double np = norm(p);
  if (nq == 0.0 || np == 0.0) throw DegenerateInputError("cosine similarity of a zero vector");
  return d / (nq * np);
}

Matrix similarity_gradient(const DualEncoder& enc, std::span<const double> q_vec,
                           std::span<const TokenId> passage, SimilarityKind kind) {
  if (passage.empty()) throw DegenerateInputError("similarity gradient of an empty passage");
  const std::size_t d = enc.dim();
  if (q_vec.size() != d) throw ValidationError("similarity gradient: dimension mismatch");
  const double inv_len = 1.0 / static_cast<double>(passage.size());

  // Gradient with respect to the pooled passage vector.
  Vector pooled_grad(q_vec.begin(), q_vec.end());
  if (kind == SimilarityKind::cosine) {
    const Vector p = enc.encode_passage(passage);
    const double nq = norm(q_vec);
    const double np = norm(p);
    if (nq == 0.0 || np == 0.0) throw DegenerateInputError("cosine gradient at a zero vector");
    const double qp = dot(q_vec, p);
    const double a = 1.0 / (nq * np);
    const double b = qp / (nq * np * np * np);
    for (std::size_t c = 0; c < d; ++c) pooled_grad[c] = a * q_vec[c] - b * p[c];
  }

  Matrix grad(passage.size(), d);
  for (std::size_t i = 0; i < passage.size(); ++i) {
    auto row = grad.row(i);
    for (std::size_t c = 0; c < d; ++c) row[c] = pooled_grad[c] * inv_len;
  }
  return grad;
}

TextEncoder::TextEncoder(std::shared_ptr<const Vocabulary> vocab,
                         std::shared_ptr<const DualEncoder> encoder, SimilarityKind kind)
    : vocab_(std::move(vocab)), encoder_(std::move(encoder)), kind_(kind) {
  if (!vocab_ || !encoder_) throw ValidationError("text encoder needs a vocabulary and an encoder");
  if (vocab_->size() != encoder_->vocab_size()) {
    throw ValidationError("encoder table rows do not match the vocabulary size");
  }
}

Vector TextEncoder::embed_query(std::string_view text) const {
  return encoder_->encode_query(tokenize(text).ids);
}

Vector TextEncoder::embed_passage(std::string_view text) const {
  return encoder_->encode_passage(tokenize(text).ids);
}

double TextEncoder::score(std::string_view query, std::string_view passage) const {
  return similarity(embed_query(query), embed_passage(passage), kind_);
}

double TextEncoder::score(std::span<const double> query_vec, std::string_view passage) const {
  return similarity(query_vec, embed_passage(passage), kind_);
}

}  // namespace ragjack
