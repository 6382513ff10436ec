#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "clonewatch/errors.hpp"
#include "clonewatch/node2vec.hpp"
#include "clonewatch/synthetic.hpp"
#include "clonewatch/views.hpp"

using namespace clonewatch;
namespace fs = std::filesystem;

namespace {

AccountProfile account(const std::string& id, std::vector<std::string> posts = {}) {
  AccountProfile a;
  a.account_id = id;
  a.username = id;
  a.posts = std::move(posts);
  return a;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const auto path = fs::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double n = a.norm() * b.norm();
  return n == 0 ? 0.0 : a.dot(b) / n;
}

node2vec::Config small_config(std::uint64_t seed = 3) {
  node2vec::Config c;
  c.dimensions = 16;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("external per-post vectors are mean pooled") {
  const Corpus c({account("a", {"x", "y"}), account("b")});
  const auto path = write_file("cw_posts.csv", "account_id,post_index,v0,v1,v2\na,0,1,0,0\na,1,0,1,0\n");
  const auto view = build_post_view(c, {.dimension = 3}, path);
  CHECK(view.rows() == 2);
  CHECK(view.data.row(0).isApprox(Eigen::RowVector3d(0.5, 0.5, 0.0)));
  CHECK(view.data.row(1).isZero());
  fs::remove(path);
}

TEST_CASE("external jsonl per-account vectors") {
  const Corpus c({account("a"), account("b")});
  const auto path = write_file("cw_posts.jsonl",
                               "{\"dimension\": 2}\n{\"account_id\": \"b\", \"vector\": [3, 4]}\n");
  const auto view = build_post_view(c, {.dimension = 2}, path);
  CHECK(view.data.row(1).isApprox(Eigen::RowVector2d(3, 4)));
  CHECK(view.data.row(0).isZero());
  fs::remove(path);
}

TEST_CASE("external width mismatch names the account") {
  const Corpus c({account("a"), account("bob")});
  const auto path = write_file("cw_bad.jsonl", "{\"dimension\": 2}\n{\"account_id\": \"bob\", \"vector\": [1, 2, 3]}\n");
  try {
    build_post_view(c, {.dimension = 2}, path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("bob") != std::string::npos);
  }
  const auto csv = write_file("cw_bad.csv", "account_id,v0,v1\nbob,1,2\n");
  CHECK_THROWS_AS(build_post_view(c, {.dimension = 3}, csv), ParseError);
  fs::remove(path);
  fs::remove(csv);
}

TEST_CASE("fallback embedder") {
  const Corpus c({account("a", {"coffee beans roasted", "coffee beans roasted"}), account("b", {"cats sleep"}),
                  account("c")});
  const HashedTfidfEmbedder embedder(c, 64);
  const auto v = embedder.embed("coffee beans roasted");
  CHECK(v.size() == 64);
  CHECK(v.norm() == doctest::Approx(1.0));
  CHECK(embedder.embed("").isZero());
  const auto view = build_post_view(c, {.dimension = 64});
  CHECK(view.data.row(0).transpose().isApprox(v));
  CHECK(view.data.row(2).isZero());
  CHECK(build_post_view(c, {.dimension = 64}).data == view.data);
  CHECK(view.view_name == ViewName::post);
}

TEST_CASE("default post width") {
  CHECK(PostEmbedderConfig{}.dimension == 385);
}

TEST_CASE("profile view") {
  std::vector<AccountProfile> acc{account("a"), account("b"), account("c")};
  acc[0].follower_count = 0;
  acc[1].follower_count = 50;
  acc[2].follower_count = 100;
  for (auto& a : acc) a.tweet_count = 9;
  acc[1].has_profile_image = true;
  acc[2].description = "hello";
  const auto view = build_profile_view(Corpus(acc));
  REQUIRE(view.cols() == kProfileColumns);
  CHECK(view.data.col(0) == Eigen::Vector3d(0, 0.5, 1.0));
  CHECK(view.data.col(2).isZero());
  CHECK(view.data.col(8) == Eigen::Vector3d(0, 1, 0));
  CHECK(view.data.col(10) == Eigen::Vector3d(0, 0, 1));
  CHECK(view.data.col(9) == Eigen::Vector3d(0, 0, 1));
}

TEST_CASE("profile view entries stay in [0, 1] and rows align") {
  SyntheticConfig cfg;
  cfg.population = 120;
  const auto corpus = generate_synthetic(cfg, 8).corpus;
  const auto profile = build_profile_view(corpus);
  CHECK(profile.data.minCoeff() >= 0.0);
  CHECK(profile.data.maxCoeff() <= 1.0);
  for (Eigen::Index j : {6, 8, 10, 11})
    for (Eigen::Index i = 0; i < profile.rows(); ++i)
      CHECK((profile.data(i, j) == 0.0 || profile.data(i, j) == 1.0));
  const auto post = build_post_view(corpus, {.dimension = 32});
  const auto net = node2vec::build_network_view(corpus, ViewName::friend_network, small_config());
  CHECK(post.row_ids == profile.row_ids);
  CHECK(net.row_ids == profile.row_ids);
  CHECK(net.view_name == ViewName::friend_network);
  for (std::size_t i = 0; i < profile.row_ids.size(); ++i) CHECK(profile.row_ids[i] == corpus.ordered()[i]->account_id);
}

TEST_CASE("validate rejects non-finite entries") {
  ViewMatrix v;
  v.row_ids = {"a"};
  v.data = Eigen::MatrixXd::Zero(1, 2);
  v.validate();
  v.data(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(v.validate(), ValidationError);
  v.data = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(v.validate(), ValidationError);
}

TEST_CASE("transition weights follow the three-case rule") {
  // Path a(0) - b(1) - c(2).
  const auto path = node2vec::make_adjacency(3, {{0, 1}, {1, 2}});
  CHECK(node2vec::transition_weights(path, 0, 1, 0.5, 2.0) == std::vector<double>{2.0, 0.5});
  const auto triangle = node2vec::make_adjacency(3, {{0, 1}, {1, 2}, {0, 2}});
  CHECK(node2vec::transition_weights(triangle, 0, 1, 0.5, 2.0) == std::vector<double>{2.0, 1.0});
}

TEST_CASE("walks respect adjacency and length") {
  const auto adj = node2vec::make_adjacency(6, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {1, 3}});
  auto cfg = small_config();
  const auto walks = node2vec::generate_walks(adj, cfg);
  CHECK(walks.size() == 6u * static_cast<std::size_t>(cfg.walks_per_node));
  for (const auto& w : walks) {
    REQUIRE_FALSE(w.empty());
    CHECK(w.size() <= static_cast<std::size_t>(cfg.walk_length));
    if (w[0] >= 4) CHECK(w.size() == 1);
    else CHECK(w.size() == static_cast<std::size_t>(cfg.walk_length));
    for (std::size_t i = 1; i < w.size(); ++i) {
      const auto& nb = adj[w[i - 1]];
      CHECK(std::binary_search(nb.begin(), nb.end(), w[i]));
    }
  }
  CHECK(node2vec::generate_walks(adj, cfg) == walks);
}

TEST_CASE("two cliques separate in embedding space") {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::uint32_t base : {0u, 10u})
    for (std::uint32_t i = 0; i < 10; ++i)
      for (std::uint32_t j = i + 1; j < 10; ++j) edges.emplace_back(base + i, base + j);
  const auto adj = node2vec::make_adjacency(20, edges);
  auto cfg = small_config(11);
  const auto emb = node2vec::train_skipgram(node2vec::generate_walks(adj, cfg), 20, cfg);
  REQUIRE(emb.rows() == 20);
  REQUIRE(emb.cols() == 16);
  double intra = 0, inter = 0;
  int n_intra = 0, n_inter = 0;
  for (int i = 0; i < 20; ++i)
    for (int j = i + 1; j < 20; ++j) {
      const double c = cosine(emb.row(i), emb.row(j));
      if ((i < 10) == (j < 10)) intra += c, ++n_intra;
      else inter += c, ++n_inter;
    }
  CHECK(intra / n_intra > inter / n_inter);
}

TEST_CASE("skip-gram is deterministic and zero for absent nodes") {
  const auto adj = node2vec::make_adjacency(3, {{0, 1}});
  const auto cfg = small_config(5);
  const auto walks = node2vec::generate_walks(adj, cfg);
  const auto a = node2vec::train_skipgram(walks, 3, cfg);
  CHECK(a == node2vec::train_skipgram(walks, 3, cfg));
  CHECK(a.row(2).isZero());
  CHECK_FALSE(a.row(0).isZero());
  const auto empty = node2vec::make_adjacency(4, {});
  CHECK(node2vec::train_skipgram(node2vec::generate_walks(empty, cfg), 4, cfg).isZero());
}

TEST_CASE("network adjacency is undirected over corpus rows") {
  std::vector<AccountProfile> acc{account("a"), account("b"), account("c")};
  acc[0].followers = {"c"};
  acc[1].friends = {"a"};
  const Corpus c(acc);
  const auto friends = node2vec::network_adjacency(c, ViewName::friend_network);
  CHECK(friends[0] == std::vector<std::uint32_t>{1});
  CHECK(friends[1] == std::vector<std::uint32_t>{0});
  CHECK(friends[2].empty());
  const auto followers = node2vec::network_adjacency(c, ViewName::follower_network);
  CHECK(followers[2] == std::vector<std::uint32_t>{0});
}

TEST_CASE("node2vec config validation") {
  auto cfg = small_config();
  cfg.p_return = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.walk_length = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
