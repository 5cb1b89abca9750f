#include "ragjack/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ragjack/text.hpp"

namespace ragjack {

TfidfModel TfidfModel::fit(std::span<const std::string> documents) {
  TfidfModel model;
  model.corpus_size_ = documents.size();
  for (const auto& doc : documents) {
    auto words = split_words(doc);
    std::set<std::string> unique(words.begin(), words.end());
    for (const auto& w : unique) ++model.df_[w];
  }
  return model;
}

std::size_t TfidfModel::document_frequency(std::string_view term) const {
  auto it = df_.find(term);
  return it == df_.end() ? 0 : it->second;
}

double TfidfModel::idf(std::string_view term) const {
  const double n = static_cast<double>(corpus_size_);
  const double df = static_cast<double>(document_frequency(term));
  return std::log((1.0 + n) / (1.0 + df)) + 1.0;
}

std::map<std::string, double> TfidfModel::vectorize(std::string_view text) const {
  std::map<std::string, double> vec;
  for (auto& w : split_words(text)) vec[std::move(w)] += 1.0;
  for (auto& [term, weight] : vec) weight *= idf(term);
  return vec;
}

double tfidf_similarity(const TfidfModel& model, std::string_view a, std::string_view b) {
  const auto va = model.vectorize(a);
  const auto vb = model.vectorize(b);
  if (va.empty() || vb.empty()) return 0.0;
  double num = 0.0;
  for (const auto& [term, w] : va) {
    auto it = vb.find(term);
    if (it != vb.end()) num += w * it->second;
  }
  auto sq = [](const auto& v) {
    double s = 0.0;
    for (const auto& [_, w] : v) s += w * w;
    return s;
  };
  const double sim = num / std::sqrt(sq(va) * sq(vb));
  return std::clamp(sim, 0.0, 1.0);
}

}  // namespace ragjack
