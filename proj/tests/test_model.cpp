#include <doctest.h>

#include <filesystem>
#include <algorithm>
#include <fstream>
#include <sstream>

#include "clonewatch/errors.hpp"
#include "clonewatch/model.hpp"
#include "clonewatch/synthetic.hpp"
#include "clonewatch/textsim.hpp"

using namespace clonewatch;

namespace {

std::string record(const std::string& id, const std::string& friends = "[]") {
  return R"({"id":")" + id + R"(","username":")" + id +
         R"(","screen_name":"S","description":"d","location":"","followers":1,"friends":2,)"
         R"("tweets":3,"favorites":4,"lists":5,"registered_at":"2020-01-02",)"
         R"("flags":{"background":true,"image":false,"url":true},"posts":["p"],"friend_ids":)" +
         friends + R"(,"follower_ids":[]})";
}

Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus_jsonl(in);
}

// Optimal string alignment distance: a transposition counts as one edit.
std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1])
        d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
    }
  return d[a.size()][b.size()];
}

std::string serialize(const Corpus& c) {
  std::ostringstream out;
  write_corpus_jsonl(c, out);
  return out.str();
}

}  // namespace

TEST_CASE("two well-formed accounts load") {
  const auto c = parse(record("a") + "\n" + record("b", R"(["a"])") + "\n");
  CHECK(c.size() == 2);
  CHECK(c.at("b").friends == std::vector<AccountId>{"a"});
  CHECK(c.at("a").tweet_count == 3);
  CHECK(c.at("a").has_custom_background);
  CHECK_FALSE(c.at("a").has_profile_image);
  CHECK(c.dangling_edges() == 0);
}

TEST_CASE("dangling edges are dropped and counted") {
  const auto c = parse(record("a") + "\n" + record("b", R"(["ghost"])") + "\n");
  CHECK(c.at("b").friends.empty());
  CHECK(c.dangling_edges() == 1);
}

TEST_CASE("duplicate id is rejected by name") {
  try {
    parse(record("u1") + "\n" + record("u1") + "\n");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("u1") != std::string::npos);
  }
}

TEST_CASE("malformed line reports its line number") {
  try {
    parse(record("a") + "\n{not json\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("registration after snapshot is rejected") {
  CHECK_THROWS_AS(parse(R"({"snapshot_at":"2019-01-01"})" "\n" + record("a") + "\n"), Error);
}

TEST_CASE("account age is measured in days to the snapshot") {
  const auto c = parse(R"({"snapshot_at":"2020-01-12"})" "\n" + record("a") + "\n");
  CHECK(c.account_age_days(c.at("a")) == 10);
  CHECK(parse_iso_date("1970-01-02") == 1);
  CHECK(format_iso_date(parse_iso_date("2024-02-29")) == "2024-02-29");
}

TEST_CASE("save then load reproduces the corpus") {
  SyntheticConfig cfg;
  cfg.population = 60;
  cfg.duplicate_rate = 0.05;
  const auto data = generate_synthetic(cfg, 3);
  const auto dir = std::filesystem::temp_directory_path() / "clonewatch_test_model";
  std::filesystem::create_directories(dir);
  save_corpus(data.corpus, dir / "c.jsonl");
  const auto loaded = load_corpus(dir / "c.jsonl");
  CHECK(loaded == data.corpus);
  save_labeled_pairs(data.truth, dir / "t.csv");
  CHECK(load_labeled_pairs(dir / "t.csv") == data.truth);
  std::filesystem::remove_all(dir);
}

TEST_CASE("synthetic arithmetic") {
  SyntheticConfig cfg;
  cfg.population = 100;
  cfg.clone_rate = 0.05;
  const auto data = generate_synthetic(cfg, 7);
  CHECK(data.corpus.size() == 105);
  std::size_t cloned = 0;
  for (const auto& p : data.truth) cloned += p.label == PairLabel::cloned;
  CHECK(cloned == 5);
}

TEST_CASE("synthetic generation is deterministic") {
  SyntheticConfig cfg;
  cfg.population = 150;
  cfg.duplicate_rate = 0.03;
  const auto a = generate_synthetic(cfg, 42), b = generate_synthetic(cfg, 42);
  CHECK(serialize(a.corpus) == serialize(b.corpus));
  CHECK(a.truth == b.truth);
  CHECK(serialize(generate_synthetic(cfg, 43).corpus) != serialize(a.corpus));
}

TEST_CASE("every injected pair clears the name similarity floor and is ordered") {
  SyntheticConfig cfg;
  cfg.population = 400;
  cfg.duplicate_rate = 0.05;
  for (std::uint64_t seed : {1u, 7u, 19u}) {
    const auto data = generate_synthetic(cfg, seed);
    REQUIRE(data.truth.size() == 40);
    for (const auto& p : data.truth) {
      const auto& o = data.corpus.at(p.older_id);
      const auto& n = data.corpus.at(p.newer_id);
      const double sim = std::max(textsim::jaro_winkler(o.username, n.username),
                                  textsim::jaro_winkler(o.screen_name, n.screen_name));
      CHECK(sim >= 0.8);
      CHECK(o.registered_at <= n.registered_at);
      CHECK(p.label_kind == LabelKind::clean);
    }
  }
}

TEST_CASE("each perturbation step is a single edit") {
  for (std::uint64_t s = 0; s < 300; ++s) {
    const auto once = perturb_name("alice_smith", 1, s);
    CHECK(edit_distance("alice_smith", once) == 1);
    CHECK(once.front() == 'a');
    CHECK(edit_distance(once, perturb_name(once, 1, s + 1000)) == 1);
  }
}

TEST_CASE("rates summing to one are a config error") {
  SyntheticConfig cfg;
  cfg.clone_rate = 0.6;
  cfg.duplicate_rate = 0.4;
  CHECK_THROWS_AS(generate_synthetic(cfg, 1), ConfigError);
}

TEST_CASE("label strings") {
  CHECK(parse_pair_label("cloned") == PairLabel::cloned);
  CHECK(to_string(LabelKind::weak) == "weak");
  CHECK_THROWS_AS(parse_pair_label("maybe"), Error);
  CHECK(split_csv_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
}
