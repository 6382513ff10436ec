#include "clonewatch/pairgraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "clonewatch/errors.hpp"

namespace clonewatch {

void GraphConfig::validate() const {
  if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("delta must lie in (0, 1]");
  if (max_pairs_per_account && *max_pairs_per_account == 0)
    throw ConfigError("max_pairs_per_account must be positive");
}

std::string_view to_string(NameTrigger t) {
  switch (t) {
    case NameTrigger::username: return "username";
    case NameTrigger::screen_name: return "screen_name";
    case NameTrigger::both: return "both";
  }
  return "both";
}

std::string_view to_string(AuthStatus s) {
  switch (s) {
    case AuthStatus::null: return "null";
    case AuthStatus::successful: return "successful";
    case AuthStatus::unsuccessful: return "unsuccessful";
  }
  return "null";
}

NameTrigger parse_name_trigger(std::string_view s) {
  if (s == "username") return NameTrigger::username;
  if (s == "screen_name") return NameTrigger::screen_name;
  if (s == "both") return NameTrigger::both;
  throw ParseError("unknown trigger '" + std::string(s) + "'");
}

AuthStatus parse_auth_status(std::string_view s) {
  if (s == "null" || s.empty()) return AuthStatus::null;
  if (s == "successful") return AuthStatus::successful;
  if (s == "unsuccessful") return AuthStatus::unsuccessful;
  throw ParseError("unknown auth status '" + std::string(s) + "'");
}

std::pair<const AccountProfile*, const AccountProfile*> order_by_age(const AccountProfile& a,
                                                                     const AccountProfile& b) {
  if (a.registered_at < b.registered_at) return {&a, &b};
  if (b.registered_at < a.registered_at) return {&b, &a};
  return a.account_id <= b.account_id ? std::pair{&a, &b} : std::pair{&b, &a};
}

namespace {

// Largest Jaro-Winkler score reachable by strings of lengths `la` and `lb`.
double jaro_winkler_upper_bound(std::size_t la, std::size_t lb) {
  if (la == 0 || lb == 0) return 0.0;
  const double s = static_cast<double>(std::min(la, lb));
  const double l = static_cast<double>(std::max(la, lb));
  const double j = (2.0 + s / l) / 3.0;
  return j > 0.7 ? j + 0.4 * (1.0 - j) : j;
}

// Exact upper bound given at most `m` matches and a common prefix of `prefix`.
double jaro_winkler_bound_from_matches(double m, std::size_t la, std::size_t lb, std::size_t prefix) {
  if (m <= 0.0) return 0.0;
  const double j = std::min(1.0, (m / static_cast<double>(la) + m / static_cast<double>(lb) + 1.0) / 3.0);
  return j > 0.7 ? j + 0.1 * static_cast<double>(prefix) * (1.0 - j) : j;
}

std::size_t common_prefix(std::string_view a, std::string_view b) {
  const std::size_t cap = std::min<std::size_t>({4, a.size(), b.size()});
  std::size_t p = 0;
  while (p < cap && a[p] == b[p]) ++p;
  return p;
}

struct Field {
  std::size_t account;
  std::string_view text;
  std::array<std::uint8_t, 64> histogram{};
};

// Multiset intersection of byte buckets bounds the number of Jaro matches.
std::size_t max_matches(const Field& a, const Field& b) {
  std::size_t m = 0;
  for (std::size_t k = 0; k < 64; ++k) m += std::min(a.histogram[k], b.histogram[k]);
  return m;
}

Field make_field(std::size_t account, std::string_view text) {
  Field f{account, text, {}};
  for (char c : text) {
    auto& slot = f.histogram[static_cast<unsigned char>(c) % 64];
    if (slot < 255) ++slot;
  }
  return f;
}

// Candidate index pairs (i < j) whose `field` similarity exceeds delta.
void collect_field_edges(const std::vector<Field>& fields, double delta, bool first_char_block,
                         std::map<std::pair<std::size_t, std::size_t>, unsigned>& out,
                         unsigned bit) {
  // Sort by length so the length bound prunes a contiguous window.
  std::vector<Field> sorted = fields;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Field& a, const Field& b) { return a.text.size() < b.text.size(); });
  for (std::size_t x = 0; x < sorted.size(); ++x) {
    const auto& fa = sorted[x];
    if (fa.text.empty()) continue;
    for (std::size_t y = x + 1; y < sorted.size(); ++y) {
      const auto& fb = sorted[y];
      if (jaro_winkler_upper_bound(fa.text.size(), fb.text.size()) <= delta) break;
      if (first_char_block && fa.text[0] != fb.text[0]) continue;
      if (jaro_winkler_bound_from_matches(static_cast<double>(max_matches(fa, fb)), fa.text.size(),
                                          fb.text.size(), common_prefix(fa.text, fb.text)) <= delta)
        continue;
      if (textsim::jaro_winkler(fa.text, fb.text) > delta) {
        auto key = std::minmax(fa.account, fb.account);
        out[{key.first, key.second}] |= bit;
      }
    }
  }
}

NameTrigger trigger_from_bits(unsigned bits) {
  if (bits == 3u) return NameTrigger::both;
  return bits == 1u ? NameTrigger::username : NameTrigger::screen_name;
}

CandidatePair make_pair(const AccountProfile& a, const AccountProfile& b, unsigned bits) {
  auto [older, newer] = order_by_age(a, b);
  CandidatePair p;
  p.older_id = older->account_id;
  p.newer_id = newer->account_id;
  p.trigger = trigger_from_bits(bits);
  return p;
}

void sort_pairs(std::vector<CandidatePair>& pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const CandidatePair& a, const CandidatePair& b) {
    return std::tie(a.older_id, a.newer_id) < std::tie(b.older_id, b.newer_id);
  });
}

}  // namespace

std::vector<CandidatePair> build_graph(const Corpus& corpus, const GraphConfig& config) {
  config.validate();
  const auto& accounts = corpus.ordered();
  const bool block = accounts.size() > config.blocking_threshold;

  std::vector<Field> usernames, screen_names;
  usernames.reserve(accounts.size());
  screen_names.reserve(accounts.size());
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    usernames.push_back(make_field(i, accounts[i]->username));
    screen_names.push_back(make_field(i, accounts[i]->screen_name));
  }
  std::map<std::pair<std::size_t, std::size_t>, unsigned> hits;
  collect_field_edges(usernames, config.delta, block, hits, 1u);
  collect_field_edges(screen_names, config.delta, block, hits, 2u);

  std::vector<CandidatePair> pairs;
  pairs.reserve(hits.size());
  for (const auto& [key, bits] : hits) pairs.push_back(make_pair(*accounts[key.first], *accounts[key.second], bits));

  if (config.max_pairs_per_account) {
    // Greedy by similarity: keep the strongest edges until an endpoint is full.
    auto strength = [&](const CandidatePair& p) {
      const auto& a = corpus.at(p.older_id);
      const auto& b = corpus.at(p.newer_id);
      return std::max(textsim::jaro_winkler(a.username, b.username),
                      textsim::jaro_winkler(a.screen_name, b.screen_name));
    };
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) order.emplace_back(-strength(pairs[i]), i);
    std::sort(order.begin(), order.end());
    std::map<AccountId, std::size_t> degree;
    std::vector<CandidatePair> kept;
    for (const auto& [neg, i] : order) {
      auto& da = degree[pairs[i].older_id];
      auto& db = degree[pairs[i].newer_id];
      if (da >= *config.max_pairs_per_account || db >= *config.max_pairs_per_account) continue;
      ++da;
      ++db;
      kept.push_back(pairs[i]);
    }
    pairs = std::move(kept);
  }
  sort_pairs(pairs);
  return pairs;
}

std::vector<CandidatePair> build_graph_exhaustive(const Corpus& corpus, double delta) {
  const auto& accounts = corpus.ordered();
  std::vector<CandidatePair> pairs;
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    for (std::size_t j = i + 1; j < accounts.size(); ++j) {
      unsigned bits = 0;
      if (textsim::jaro_winkler(accounts[i]->username, accounts[j]->username) > delta) bits |= 1u;
      if (textsim::jaro_winkler(accounts[i]->screen_name, accounts[j]->screen_name) > delta) bits |= 2u;
      if (bits) pairs.push_back(make_pair(*accounts[i], *accounts[j], bits));
    }
  }
  sort_pairs(pairs);
  return pairs;
}

std::vector<DeltaSweepRow> sweep_delta(const Corpus& corpus, std::span<const double> deltas,
                                       const std::vector<LabeledPair>& truth) {
  std::vector<DeltaSweepRow> rows;
  for (double d : deltas) rows.push_back({d, 0, 0, 0});
  std::map<std::pair<std::size_t, std::size_t>, bool> wanted;
  for (const auto& t : truth) {
    if (t.label != PairLabel::cloned) continue;
    if (!corpus.contains(t.older_id) || !corpus.contains(t.newer_id)) continue;
    const std::size_t a = corpus.index_of(t.older_id), b = corpus.index_of(t.newer_id);
    wanted[{std::min(a, b), std::max(a, b)}] = true;
  }
  for (auto& r : rows) r.truth = wanted.size();

  const auto& accounts = corpus.ordered();
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    for (std::size_t j = i + 1; j < accounts.size(); ++j) {
      const double s = std::max(textsim::jaro_winkler(accounts[i]->username, accounts[j]->username),
                                textsim::jaro_winkler(accounts[i]->screen_name, accounts[j]->screen_name));
      const bool is_truth = wanted.count({i, j}) != 0;
      for (auto& r : rows) {
        if (s > r.delta) {
          ++r.edges;
          if (is_truth) ++r.recovered;
        }
      }
    }
  }
  return rows;
}

textsim::TfidfModel fit_description_tfidf(const Corpus& corpus) {
  std::vector<textsim::Terms> docs;
  docs.reserve(corpus.size());
  for (const auto* a : corpus.ordered()) docs.push_back(textsim::preprocess(a->description));
  return textsim::TfidfModel::fit(docs);
}

namespace {

double string_similarity(std::string_view a, std::string_view b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  return textsim::jaro_winkler(a, b);
}

double abs_diff(std::uint64_t a, std::uint64_t b) {
  return static_cast<double>(a > b ? a - b : b - a);
}

}  // namespace

PairFeatureVector extract_pair_features(const Corpus& corpus, const CandidatePair& pair,
                                        const textsim::TfidfModel& tfidf) {
  const auto& a = corpus.at(pair.older_id);
  const auto& b = corpus.at(pair.newer_id);
  PairFeatureVector f;
  f.values[0] = string_similarity(a.screen_name, b.screen_name);
  f.values[1] = string_similarity(a.location, b.location);
  f.values[2] = string_similarity(a.username, b.username);

  const auto ta = textsim::preprocess(a.description);
  const auto tb = textsim::preprocess(b.description);
  if (ta.empty() && tb.empty())
    f.values[3] = 1.0;
  else if (ta.empty() || tb.empty())
    f.values[3] = 0.0;
  else
    f.values[3] = textsim::tfidf_cosine(tfidf, ta, tb);

  const auto lo = std::min(a.follower_count, b.follower_count);
  const auto hi = std::max(a.follower_count, b.follower_count);
  f.values[4] = hi == 0 ? 1.0 : static_cast<double>(lo) / static_cast<double>(hi);
  f.values[5] = abs_diff(a.follower_count, b.follower_count);
  f.values[6] = std::fabs(static_cast<double>(a.registered_at - b.registered_at));
  f.values[7] = abs_diff(a.tweet_count, b.tweet_count);
  f.values[8] = abs_diff(a.favorite_count, b.favorite_count);
  f.values[9] = abs_diff(a.friend_count, b.friend_count);
  return f;
}

void save_pairs_csv(const std::vector<PairRecord>& pairs, const std::filesystem::path& path,
                    bool with_final) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "older_id,newer_id,trigger";
  for (int i = 1; i <= 10; ++i) out << ",f" << i;
  out << ",predicted,auth_status" << (with_final ? ",final" : "") << '\n';
  out << std::setprecision(17);
  for (const auto& rec : pairs) {
    const auto& p = rec.pair;
    out << p.older_id << ',' << p.newer_id << ',' << to_string(p.trigger);
    for (std::size_t i = 0; i < PairFeatureVector::size; ++i) {
      out << ',';
      if (p.features) out << p.features->values[i];
    }
    out << ',' << (p.predicted ? to_string(*p.predicted) : std::string_view{}) << ','
        << to_string(p.auth_status);
    if (with_final) out << ',' << (rec.final_verdict ? to_string(*rec.final_verdict) : std::string_view{});
    out << '\n';
  }
}

std::vector<PairRecord> load_pairs_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open pairs file " + path.string());
  std::vector<PairRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv_line(line);
    if (lineno == 1 && f[0] == "older_id") continue;
    if (f.size() != 15 && f.size() != 16) throw ParseError("expected 15 or 16 columns", lineno);
    try {
      PairRecord rec;
      auto& p = rec.pair;
      p.older_id = f[0];
      p.newer_id = f[1];
      p.trigger = parse_name_trigger(f[2]);
      if (!f[3].empty()) {
        PairFeatureVector fv;
        for (std::size_t i = 0; i < PairFeatureVector::size; ++i) fv.values[i] = std::stod(f[3 + i]);
        p.features = fv;
      }
      if (!f[13].empty()) p.predicted = parse_pair_label(f[13]);
      p.auth_status = parse_auth_status(f[14]);
      if (f.size() == 16 && !f[15].empty()) rec.final_verdict = parse_pair_label(f[15]);
      out.push_back(std::move(rec));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    } catch (const std::exception& e) {
      throw ParseError(std::string("bad number: ") + e.what(), lineno);
    }
  }
  return out;
}

}  // namespace clonewatch
