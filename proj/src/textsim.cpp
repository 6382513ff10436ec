#include "clonewatch/textsim.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>

namespace clonewatch::textsim {

namespace {

template <typename Flags>
double jaro_core(std::string_view a, std::string_view b, Flags& a_hit, Flags& b_hit) {
  const std::size_t la = a.size(), lb = b.size();
  const std::size_t longest = std::max(la, lb);
  const std::size_t window = longest / 2 > 0 ? longest / 2 - 1 : 0;

  std::size_t matches = 0;
  for (std::size_t i = 0; i < la; ++i) {
    const std::size_t lo = i > window ? i - window : 0;
    const std::size_t hi = std::min(lb, i + window + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (b_hit[j] || a[i] != b[j]) continue;
      a_hit[i] = b_hit[j] = 1;
      ++matches;
      break;
    }
  }
  if (matches == 0) return 0.0;

  std::size_t half_transpositions = 0;
  for (std::size_t i = 0, j = 0; i < la; ++i) {
    if (!a_hit[i]) continue;
    while (!b_hit[j]) ++j;
    if (a[i] != b[j]) ++half_transpositions;
    ++j;
  }
  const double m = static_cast<double>(matches);
  const double t = static_cast<double>(half_transpositions) / 2.0;
  return (m / static_cast<double>(la) + m / static_cast<double>(lb) + (m - t) / m) / 3.0;
}

}  // namespace

double jaro(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) return 0.0;
  if (a.size() <= 128 && b.size() <= 128) {
    std::array<char, 128> a_hit{}, b_hit{};
    return jaro_core(a, b, a_hit, b_hit);
  }
  std::vector<char> a_hit(a.size(), 0), b_hit(b.size(), 0);
  return jaro_core(a, b, a_hit, b_hit);
}

double jaro_winkler(std::string_view a, std::string_view b) {
  const double j = jaro(a, b);
  if (j <= 0.7) return j;
  std::size_t prefix = 0;
  const std::size_t cap = std::min<std::size_t>({4, a.size(), b.size()});
  while (prefix < cap && a[prefix] == b[prefix]) ++prefix;
  return j + static_cast<double>(prefix) * 0.1 * (1.0 - j);
}

namespace {

// Lowercase English stopwords (the classic Snowball/NLTK core list, minus
// contractions, which preprocessing folds into plain tokens anyway).
constexpr std::array<std::string_view, 153> kStopwords = {
    "a",        "about",   "above",   "after",   "again",   "against",  "all",     "am",
    "an",       "and",     "any",     "are",     "as",      "at",       "be",      "because",
    "been",     "before",  "being",   "below",   "between", "both",     "but",     "by",
    "can",      "could",   "did",     "do",      "does",    "doing",    "down",    "during",
    "each",     "few",     "for",     "from",    "further", "had",      "has",     "have",
    "having",   "he",      "her",     "here",    "hers",    "herself",  "him",     "himself",
    "his",      "how",     "i",       "if",      "in",      "into",     "is",      "it",
    "its",      "itself",  "just",    "me",      "more",    "most",     "my",      "myself",
    "no",       "nor",     "not",     "now",     "of",      "off",      "on",      "once",
    "only",     "or",      "other",   "ought",   "our",     "ours",     "ourselves", "out",
    "over",     "own",     "same",    "she",     "should",  "so",       "some",    "such",
    "than",     "that",    "the",     "their",   "theirs",  "them",     "themselves", "then",
    "there",    "these",   "they",    "this",    "those",   "through",  "to",      "too",
    "under",    "until",   "up",      "very",    "was",     "we",       "were",    "what",
    "when",     "where",   "which",   "while",   "who",     "whom",     "why",     "will",
    "with",     "would",   "you",     "your",    "yours",   "yourself", "yourselves", "also",
    "s",        "t",       "d",       "ll",      "m",       "o",        "re",      "ve",
    "y",        "ain",     "aren",    "couldn",  "didn",    "doesn",    "hadn",    "hasn",
    "haven",    "isn",     "ma",      "mightn",  "mustn",   "needn",    "shan",    "shouldn",
    "wasn",
};

const std::vector<std::string_view>& sorted_stopwords() {
  static const std::vector<std::string_view> sorted = [] {
    std::vector<std::string_view> v(kStopwords.begin(), kStopwords.end());
    std::sort(v.begin(), v.end());
    return v;
  }();
  return sorted;
}

}  // namespace

std::span<const std::string_view> stopwords() { return kStopwords; }

bool is_stopword(std::string_view term) {
  const auto& v = sorted_stopwords();
  return std::binary_search(v.begin(), v.end(), term);
}

std::vector<std::string> preprocess(std::string_view text) {
  std::vector<std::string> terms;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && !is_stopword(current)) terms.push_back(current);
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || std::isalnum(c)) {
      current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else if (c == '\'') {
      continue;
    } else {
      flush();
    }
  }
  flush();
  return terms;
}

TfidfModel TfidfModel::fit(std::span<const Terms> docs) {
  TfidfModel model;
  model.document_count_ = docs.size();
  // Ordered map so column indices do not depend on hash iteration order.
  std::map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::vector<std::string> unique(doc.begin(), doc.end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (auto& t : unique) ++df[t];
  }
  const double n = static_cast<double>(docs.size());
  model.idf_.reserve(df.size());
  for (const auto& [term, count] : df) {
    model.vocabulary_.emplace(term, model.idf_.size());
    model.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return model;
}

double TfidfModel::idf_of(const std::string& term) const {
  auto it = vocabulary_.find(term);
  if (it != vocabulary_.end()) return idf_[it->second];
  return std::log(1.0 + static_cast<double>(document_count_)) + 1.0;
}

std::unordered_map<std::string, double> TfidfModel::weights(std::span<const std::string> terms) const {
  std::unordered_map<std::string, double> w;
  for (const auto& t : terms) w[t] += 1.0;
  for (auto& [t, v] : w) v *= idf_of(t);
  return w;
}

double tfidf_cosine(const TfidfModel& model, std::span<const std::string> a,
                    std::span<const std::string> b) {
  const auto wa = model.weights(a);
  const auto wb = model.weights(b);
  double na = 0, nb = 0, dot = 0;
  for (const auto& [t, v] : wa) {
    na += v * v;
    if (auto it = wb.find(t); it != wb.end()) dot += v * it->second;
  }
  for (const auto& [t, v] : wb) nb += v * v;
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace clonewatch::textsim
