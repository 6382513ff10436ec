#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>

#include "clonewatch/errors.hpp"
#include "clonewatch/pairgraph.hpp"
#include "clonewatch/synthetic.hpp"

using namespace clonewatch;

namespace {

AccountProfile account(const std::string& id, const std::string& username, const std::string& screen_name,
                       Day registered = 100) {
  AccountProfile a;
  a.account_id = id;
  a.username = username;
  a.screen_name = screen_name;
  a.registered_at = registered;
  return a;
}

std::string random_name(std::mt19937_64& rng, std::size_t len) {
  std::uniform_int_distribution<int> ch('a', 'z');
  std::string s(len, ' ');
  for (auto& c : s) c = static_cast<char>(ch(rng));
  return s;
}

using Edge = std::tuple<AccountId, AccountId, NameTrigger>;

std::set<Edge> edges(const std::vector<CandidatePair>& pairs) {
  std::set<Edge> out;
  for (const auto& p : pairs) out.emplace(p.older_id, p.newer_id, p.trigger);
  return out;
}

// Independent double loop over every unordered pair.
std::set<Edge> brute_force(const Corpus& corpus, double delta) {
  std::set<Edge> out;
  const auto& acc = corpus.ordered();
  for (std::size_t i = 0; i < acc.size(); ++i)
    for (std::size_t j = 0; j < acc.size(); ++j) {
      if (i == j) continue;
      const bool u = textsim::jaro_winkler(acc[i]->username, acc[j]->username) > delta;
      const bool s = textsim::jaro_winkler(acc[i]->screen_name, acc[j]->screen_name) > delta;
      if (!u && !s) continue;
      const auto* older = acc[i];
      const auto* newer = acc[j];
      if (std::tie(older->registered_at, older->account_id) > std::tie(newer->registered_at, newer->account_id))
        continue;
      out.emplace(older->account_id, newer->account_id,
                  u && s ? NameTrigger::both : (u ? NameTrigger::username : NameTrigger::screen_name));
    }
  return out;
}

Corpus synthetic_corpus(std::size_t n, std::uint64_t seed) {
  SyntheticConfig cfg;
  cfg.population = n;
  cfg.duplicate_rate = 0.05;
  return generate_synthetic(cfg, seed).corpus;
}

}  // namespace

TEST_CASE("identical usernames form one edge") {
  const Corpus c({account("a", "alice", "X"), account("b", "alice", "Y")});
  const auto pairs = build_graph(c, {});
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].trigger == NameTrigger::username);
  CHECK(pairs[0].auth_status == AuthStatus::null);
  CHECK_FALSE(pairs[0].predicted);
}

TEST_CASE("pairs are oriented older to newer") {
  const Corpus c({account("a", "alice", "Al", 500), account("b", "alice", "Al", 100)});
  const auto pairs = build_graph(c, {});
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].older_id == "b");
  CHECK(pairs[0].newer_id == "a");
  CHECK(pairs[0].trigger == NameTrigger::both);
}

TEST_CASE("unrelated random names at a high threshold give no edges") {
  std::mt19937_64 rng(1);
  std::vector<AccountProfile> acc;
  for (int i = 0; i < 300; ++i)
    acc.push_back(account("u" + std::to_string(i), random_name(rng, 12), random_name(rng, 12)));
  CHECK(build_graph(Corpus(acc), {.delta = 0.99}).empty());
}

TEST_CASE("threshold is strict") {
  const Corpus c({account("a", "alice", "p"), account("b", "alice", "q")});
  CHECK(build_graph(c, {.delta = 1.0}).empty());
  CHECK(build_graph(c, {.delta = 0.999}).size() == 1);
  const double jw = textsim::jaro_winkler("MARTHA", "MARHTA");
  const Corpus d({account("a", "MARTHA", "p"), account("b", "MARHTA", "q")});
  CHECK(build_graph(d, {.delta = jw}).empty());
  CHECK(build_graph(d, {.delta = std::nextafter(jw, 0.0)}).size() == 1);
}

TEST_CASE("graph matches the brute-force oracle") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto corpus = synthetic_corpus(seed <= 2 ? 20 : 180, seed);
    for (double delta : {0.6, 0.8, 0.9}) {
      const auto expected = brute_force(corpus, delta);
      CHECK(edges(build_graph(corpus, {.delta = delta})) == expected);
      CHECK(edges(build_graph_exhaustive(corpus, delta)) == expected);
    }
  }
}

TEST_CASE("forced blocking keeps every same-initial edge") {
  const auto corpus = synthetic_corpus(180, 9);
  const auto full = edges(build_graph_exhaustive(corpus, 0.8));
  const auto blocked = edges(build_graph(corpus, {.delta = 0.8, .blocking_threshold = 0}));
  for (const auto& e : blocked) CHECK(full.count(e) == 1);
  for (const auto& [o, n, t] : full) {
    const auto& a = corpus.at(o);
    const auto& b = corpus.at(n);
    if (a.username[0] == b.username[0] && a.screen_name[0] == b.screen_name[0])
      CHECK(blocked.count({o, n, t}) == 1);
  }
}

TEST_CASE("lowering delta never removes an edge") {
  const auto corpus = synthetic_corpus(200, 4);
  std::set<std::pair<AccountId, AccountId>> previous;
  for (double delta : {0.95, 0.9, 0.85, 0.8, 0.75, 0.7, 0.6}) {
    std::set<std::pair<AccountId, AccountId>> current;
    for (const auto& p : build_graph(corpus, {.delta = delta})) current.emplace(p.older_id, p.newer_id);
    for (const auto& e : previous) CHECK(current.count(e) == 1);
    previous = std::move(current);
  }
}

TEST_CASE("per-account cap") {
  const Corpus c({account("a", "alice", "x1"), account("b", "alice", "x2"), account("c", "alicf", "x3")});
  const auto pairs = build_graph(c, {.max_pairs_per_account = 1});
  CHECK(pairs.size() == 1);
  CHECK(pairs[0].newer_id == "b");
  CHECK_THROWS_AS(GraphConfig{.delta = 0.0}.validate(), ConfigError);
  CHECK_THROWS_AS(GraphConfig{.delta = 1.5}.validate(), ConfigError);
}

TEST_CASE("delta sweep agrees with graph construction") {
  SyntheticConfig cfg;
  cfg.population = 150;
  cfg.duplicate_rate = 0.04;
  const auto data = generate_synthetic(cfg, 2);
  const std::vector<double> deltas{0.9, 0.8, 0.7};
  const auto rows = sweep_delta(data.corpus, deltas, data.truth);
  REQUIRE(rows.size() == 3);
  const auto cloned = static_cast<std::size_t>(std::count_if(
      data.truth.begin(), data.truth.end(), [](const LabeledPair& p) { return p.label == PairLabel::cloned; }));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].edges == build_graph(data.corpus, {.delta = deltas[i]}).size());
    CHECK(rows[i].truth == cloned);
    if (i) CHECK(rows[i].recall() >= rows[i - 1].recall());
  }
  CHECK(rows[1].recall() == 1.0);
}

TEST_CASE("identical profiles give the identity feature vector") {
  AccountProfile a = account("a", "alice", "Alice W");
  a.description = "coffee and long walks";
  a.location = "Paris";
  a.follower_count = 10;
  AccountProfile b = a;
  b.account_id = "b";
  const Corpus c({a, b});
  const auto f = extract_pair_features(c, {.older_id = "a", .newer_id = "b"}, fit_description_tfidf(c));
  CHECK(f.values == std::array<double, 10>{1, 1, 1, 1, 1, 0, 0, 0, 0, 0});
}

TEST_CASE("feature arithmetic and conventions") {
  AccountProfile a = account("a", "alice", "Alice", 100), b = account("b", "bob", "Bob", 130);
  a.follower_count = 50;
  b.follower_count = 200;
  a.tweet_count = 7;
  b.favorite_count = 3;
  a.friend_count = 4;
  a.description = "x";
  const Corpus c({a, b});
  const auto tfidf = fit_description_tfidf(c);
  const auto f = extract_pair_features(c, {.older_id = "a", .newer_id = "b"}, tfidf);
  CHECK(f.followers_ratio() == 0.25);
  CHECK(f.followers_difference() == 150);
  CHECK(f.location_similarity() == 1.0);
  CHECK(f.description_similarity() == 0.0);
  CHECK(f.account_age_difference_days() == 30);
  CHECK(f.tweets_difference() == 7);
  CHECK(f.favorites_difference() == 3);
  CHECK(f.friends_difference() == 4);
  const auto g = extract_pair_features(c, {.older_id = "b", .newer_id = "a"}, tfidf);
  CHECK(f == g);
  a.follower_count = b.follower_count = 0;
  const Corpus z({a, b});
  CHECK(extract_pair_features(z, {.older_id = "a", .newer_id = "b"}, tfidf).followers_ratio() == 1.0);
  CHECK_THROWS_AS(extract_pair_features(z, {.older_id = "a", .newer_id = "ghost"}, tfidf), LookupError);
}

TEST_CASE("features are symmetric and bounded on synthetic pairs") {
  const auto corpus = synthetic_corpus(200, 5);
  const auto tfidf = fit_description_tfidf(corpus);
  for (const auto& p : build_graph(corpus, {})) {
    const auto f = extract_pair_features(corpus, p, tfidf);
    CandidatePair swapped = p;
    std::swap(swapped.older_id, swapped.newer_id);
    CHECK(f == extract_pair_features(corpus, swapped, tfidf));
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(f.values[i] >= 0.0);
      CHECK(f.values[i] <= 1.0 + 1e-12);
    }
    for (std::size_t i = 5; i < 10; ++i) CHECK(f.values[i] >= 0.0);
  }
}

TEST_CASE("pairs csv round trip") {
  const auto corpus = synthetic_corpus(120, 6);
  const auto tfidf = fit_description_tfidf(corpus);
  std::vector<PairRecord> records;
  for (auto p : build_graph(corpus, {})) {
    p.features = extract_pair_features(corpus, p, tfidf);
    p.predicted = records.size() % 2 ? PairLabel::cloned : PairLabel::legitimate;
    p.auth_status = records.size() % 3 ? AuthStatus::successful : AuthStatus::null;
    records.push_back({p, records.size() % 2 ? std::optional(PairLabel::cloned) : std::nullopt});
  }
  REQUIRE_FALSE(records.empty());
  const auto path = std::filesystem::temp_directory_path() / "clonewatch_pairs_test.csv";
  save_pairs_csv(records, path, true);
  const auto loaded = load_pairs_csv(path);
  REQUIRE(loaded.size() == records.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].pair.pair_id() == records[i].pair.pair_id());
    CHECK(loaded[i].pair.trigger == records[i].pair.trigger);
    CHECK(loaded[i].pair.predicted == records[i].pair.predicted);
    CHECK(loaded[i].pair.auth_status == records[i].pair.auth_status);
    CHECK(loaded[i].final_verdict == records[i].final_verdict);
    for (std::size_t k = 0; k < 10; ++k)
      CHECK(loaded[i].pair.features->values[k] == doctest::Approx(records[i].pair.features->values[k]).epsilon(1e-12));
  }
  std::filesystem::remove(path);
}
