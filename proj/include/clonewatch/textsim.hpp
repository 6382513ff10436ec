#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace clonewatch::textsim {

/// Jaro similarity. 0 when either string is empty or nothing matches.
double jaro(std::string_view a, std::string_view b);

/// Jaro-Winkler with prefix scale 0.1, prefix length capped at 4, and the
/// boost applied only when the Jaro score exceeds 0.7.
double jaro_winkler(std::string_view a, std::string_view b);

/// The embedded English stopword list, lowercase.
std::span<const std::string_view> stopwords();
bool is_stopword(std::string_view term);

/// Lowercases, drops punctuation, splits on whitespace and punctuation, and
/// removes stopwords. Apostrophes are deleted rather than split on.
std::vector<std::string> preprocess(std::string_view text);

using Terms = std::vector<std::string>;

class TfidfModel {
 public:
  TfidfModel() = default;

  /// idf(t) = ln((1 + N) / (1 + df(t))) + 1. Empty documents count toward N.
  static TfidfModel fit(std::span<const Terms> docs);

  std::size_t document_count() const { return document_count_; }
  std::size_t vocabulary_size() const { return idf_.size(); }
  const std::unordered_map<std::string, std::size_t>& vocabulary() const { return vocabulary_; }
  const std::vector<double>& idf() const { return idf_; }

  /// Terms outside the vocabulary get the df = 0 weight.
  double idf_of(const std::string& term) const;

  /// Raw-count tf times idf, as a sparse term -> weight map.
  std::unordered_map<std::string, double> weights(std::span<const std::string> terms) const;

 private:
  std::unordered_map<std::string, std::size_t> vocabulary_;
  std::vector<double> idf_;
  std::size_t document_count_ = 0;
};

/// Cosine of the two tf-idf vectors; 0 when either is all-zero.
double tfidf_cosine(const TfidfModel& model, std::span<const std::string> a,
                    std::span<const std::string> b);

/// 64-bit FNV-1a, stable across platforms.
std::uint64_t fnv1a(std::string_view s);

}  // namespace clonewatch::textsim
