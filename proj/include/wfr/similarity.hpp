#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wfr/text.hpp"

namespace wfr {

/// Character-level Levenshtein distance, two-row DP.
inline size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// 1 - |A∩B| / |A∪B| over token sets; two empty texts count as identical.
inline double jaccard_distance(std::string_view a, std::string_view b) {
  auto ta = tokenize(a);
  auto tb = tokenize(b);
  std::set<std::string> sa(ta.begin(), ta.end()), sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 0.0;
  size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  size_t uni = sa.size() + sb.size() - inter;
  return 1.0 - double(inter) / double(uni);
}

using SparseVec = std::map<std::string, double>;

inline double sparse_cosine(const SparseVec& a, const SparseVec& b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  double dot = 0, na = 0, nb = 0;
  for (const auto& [k, v] : a) {
    na += v * v;
    auto it = b.find(k);
    if (it != b.end()) dot += v * it->second;
  }
  for (const auto& [k, v] : b) nb += v * v;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

/// Raw term frequency with smoothed idf = ln((1+N)/(1+df)) + 1.
class TfIdfModel {
 public:
  static TfIdfModel fit(std::span<const std::string> docs) {
    TfIdfModel m;
    m.n_docs_ = docs.size();
    for (const auto& doc : docs) {
      std::set<std::string> seen;
      for (const auto& t : tokenize(doc)) seen.insert(t);
      for (const auto& t : seen) ++m.df_[t];
    }
    return m;
  }

  SparseVec vectorize(std::string_view doc) const {
    SparseVec v;
    for (const auto& t : tokenize(doc)) v[t] += 1.0;
    for (auto& [tok, tf] : v) {
      auto it = df_.find(tok);
      double df = it == df_.end() ? 0.0 : double(it->second);
      tf *= std::log((1.0 + double(n_docs_)) / (1.0 + df)) + 1.0;
    }
    return v;
  }

  double cosine(std::string_view a, std::string_view b) const {
    return sparse_cosine(vectorize(a), vectorize(b));
  }

 private:
  std::map<std::string, long> df_;
  size_t n_docs_ = 0;
};

using Embedder = std::function<std::vector<double>(const std::string&)>;

inline double dense_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i) dot += a[i] * b[i];
  for (double v : a) na += v * v;
  for (double v : b) nb += v * v;
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace wfr
