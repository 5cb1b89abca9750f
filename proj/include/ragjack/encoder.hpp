#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ragjack/text.hpp"

namespace ragjack {

using Vector = std::vector<double>;

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }
  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class SimilarityKind { dot, cosine };

std::string to_string(SimilarityKind kind);
SimilarityKind similarity_kind_from_string(std::string_view name);

struct EncoderParams {
  std::size_t dim = 768;
  std::uint64_t seed = 0;
  /// 0 ties the passage table to the query table; values in (0, 1] blend in an
  /// independently drawn passage table.
  double passage_mix = 0.0;

  bool operator==(const EncoderParams&) const = default;
};

/// Mean-pooled token-embedding dual encoder. Tables are V x d and are
/// regenerated bit-identically from (vocabulary size, params).
class DualEncoder {
 public:
  DualEncoder(std::size_t vocab_size, EncoderParams params);
  /// Explicit tables, mostly for tests; both must have the same shape.
  DualEncoder(Matrix query_table, Matrix passage_table);

  Vector encode_query(std::span<const TokenId> tokens) const;
  Vector encode_passage(std::span<const TokenId> tokens) const;

  const Matrix& query_table() const noexcept { return query_; }
  const Matrix& passage_table() const noexcept { return passage_; }
  std::size_t dim() const noexcept { return query_.cols(); }
  std::size_t vocab_size() const noexcept { return query_.rows(); }
  const EncoderParams& params() const noexcept { return params_; }

 private:
  EncoderParams params_;
  Matrix query_;
  Matrix passage_;
};

/// Fills `out` with `dim` values uniform in [-1, 1) drawn from a stream keyed
/// by (seed, table, row).
void fill_embedding_row(std::uint64_t seed, std::uint64_t table, std::uint64_t row,
                        std::span<double> out);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);

/// Dot product or cosine. Cosine with a zero vector throws DegenerateInputError.
double similarity(std::span<const double> q, std::span<const double> p, SimilarityKind kind);

/// Gradient of Sim(q_vec, E_p(passage)) with respect to each position's token
/// embedding; row i belongs to passage[i]. Under mean pooling every row is the
/// pooled-vector gradient divided by the passage length.
Matrix similarity_gradient(const DualEncoder& enc, std::span<const double> q_vec,
                           std::span<const TokenId> passage, SimilarityKind kind);

/// Vocabulary + encoder + similarity: everything needed to score raw text.
class TextEncoder {
 public:
  TextEncoder(std::shared_ptr<const Vocabulary> vocab, std::shared_ptr<const DualEncoder> encoder,
              SimilarityKind kind);

  TokenSequence tokenize(std::string_view text) const { return ragjack::tokenize(*vocab_, text); }
  Vector embed_query(std::string_view text) const;
  Vector embed_passage(std::string_view text) const;
  /// Sim(E_q(query), E_p(passage)).
  double score(std::string_view query, std::string_view passage) const;
  double score(std::span<const double> query_vec, std::string_view passage) const;

  const Vocabulary& vocabulary() const noexcept { return *vocab_; }
  const DualEncoder& encoder() const noexcept { return *encoder_; }
  SimilarityKind kind() const noexcept { return kind_; }

 private:
  std::shared_ptr<const Vocabulary> vocab_;
  std::shared_ptr<const DualEncoder> encoder_;
  SimilarityKind kind_;
};

}  // namespace ragjack
