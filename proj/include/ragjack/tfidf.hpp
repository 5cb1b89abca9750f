#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>

namespace ragjack {

/// Smoothed TF-IDF: idf(t) = ln((1 + N) / (1 + df(t))) + 1, tf = raw count.
class TfidfModel {
 public:
  static TfidfModel fit(std::span<const std::string> documents);

  double idf(std::string_view term) const;
  std::size_t corpus_size() const noexcept { return corpus_size_; }
  std::size_t document_frequency(std::string_view term) const;

  std::map<std::string, double> vectorize(std::string_view text) const;

 private:
  std::size_t corpus_size_ = 0;
  std::map<std::string, std::size_t, std::less<>> df_;
};

/// Cosine of the tf-idf vectors; 0 when either text has no tokens.
double tfidf_similarity(const TfidfModel& model, std::string_view a, std::string_view b);

}  // namespace ragjack
