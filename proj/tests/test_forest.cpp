#include <doctest.h>

#include <limits>

#include "clonewatch/errors.hpp"
#include "clonewatch/forest.hpp"
#include "datasets.hpp"

using namespace clonewatch;
using namespace clonewatch::forest;
using namespace clonewatch::testdata;

namespace {

double weighted_gini(double pl, double nl, double pr, double nr) {
  return (nl * gini(pl, nl) + nr * gini(pr, nr)) / (nl + nr);
}

// Lowest weighted child impurity over every (feature, threshold between
// distinct neighbouring values).
double exhaustive_best(const Eigen::MatrixXd& X, const std::vector<int>& y, const std::vector<Eigen::Index>& rows) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index f = 0; f < X.cols(); ++f)
    for (Eigen::Index cut : rows) {
      const double t = X(cut, f);
      double nl = 0, pl = 0, nr = 0, pr = 0;
      for (Eigen::Index r : rows) {
        const bool left = X(r, f) <= t;
        (left ? nl : nr) += 1;
        (left ? pl : pr) += y[static_cast<std::size_t>(r)];
      }
      if (nl > 0 && nr > 0) best = std::min(best, weighted_gini(pl, nl, pr, nr));
    }
  return best;
}

void check_node_against_oracle(const DecisionTree& tree, std::int32_t node, const Eigen::MatrixXd& X,
                               const std::vector<int>& y, const std::vector<Eigen::Index>& rows) {
  const auto& n = tree.nodes()[static_cast<std::size_t>(node)];
  if (n.feature < 0) return;
  std::vector<Eigen::Index> left, right;
  double pl = 0, pr = 0;
  for (Eigen::Index r : rows) {
    if (X(r, n.feature) <= n.threshold) {
      left.push_back(r);
      pl += y[static_cast<std::size_t>(r)];
    } else {
      right.push_back(r);
      pr += y[static_cast<std::size_t>(r)];
    }
  }
  const double chosen = weighted_gini(pl, static_cast<double>(left.size()), pr, static_cast<double>(right.size()));
  CHECK(chosen == doctest::Approx(exhaustive_best(X, y, rows)).epsilon(1e-12));
  check_node_against_oracle(tree, n.left, X, y, left);
  check_node_against_oracle(tree, n.right, X, y, right);
}

}  // namespace

TEST_CASE("gini") {
  CHECK(gini(0, 4) == 0.0);
  CHECK(gini(2, 4) == 0.5);
  CHECK(gini(1, 4) == doctest::Approx(0.375));
}

TEST_CASE("single-class training predicts that class with certainty") {
  auto data = xor_data(40, 0, 1);
  for (auto& v : *data.y) v = 0;
  const Eigen::MatrixXd probe = Eigen::MatrixXd::Random(7, 2);
  for (auto kind : {LearnerKind::random_forest, LearnerKind::extra_trees, LearnerKind::logistic}) {
    auto model = make_learner(kind, {.trees = 5}, {});
    model->fit(data.X, *data.y, 3);
    const auto p = model->predict_proba(probe);
    CHECK(p.col(0).isOnes());
    CHECK(p.col(1).isZero());
  }
}

TEST_CASE("random forest fits XOR") {
  const auto data = xor_data(500, 2, 2);
  const auto rf = train_random_forest(data, 50, 7);
  CHECK(accuracy(*data.y, argmax_labels(rf->predict_proba(data.X))) >= 0.95);
  const auto again = train_random_forest(data, 50, 7);
  CHECK(again->predict_proba(data.X) == rf->predict_proba(data.X));
  const auto held_out = xor_data(500, 2, 3);
  CHECK(accuracy(*held_out.y, argmax_labels(rf->predict_proba(held_out.X))) >= 0.85);
}

TEST_CASE("extra trees fit XOR and split inside the observed range") {
  const auto data = xor_data(500, 2, 4);
  const auto ert = train_extra_trees(data, 50, 9);
  CHECK(accuracy(*data.y, argmax_labels(ert->predict_proba(data.X))) >= 0.95);
  for (const auto& tree : ert->trees())
    for (const auto& node : tree.nodes())
      if (node.feature >= 0) {
        CHECK(node.threshold >= data.X.col(node.feature).minCoeff());
        CHECK(node.threshold < data.X.col(node.feature).maxCoeff());
      }
}

TEST_CASE("extra trees on constant features predict the majority class") {
  TabularDataset data{Eigen::MatrixXd::Constant(10, 3, 2.5), std::vector<int>{1, 1, 1, 0, 1, 1, 0, 1, 1, 1}};
  const auto ert = train_extra_trees(data, 10, 1);
  const auto p = ert->predict_proba(data.X);
  CHECK(argmax_labels(p) == std::vector<int>(10, 1));
  CHECK(p(0, 1) == doctest::Approx(0.8));
}

TEST_CASE("logistic regression separates distant blobs") {
  const auto data = blobs(200, 3, 10.0, 5);
  const auto lr = train_logistic(data);
  CHECK(accuracy(*data.y, argmax_labels(lr->predict_proba(data.X))) == 1.0);
  CHECK(lr->epochs_run() <= 500);
}

TEST_CASE("flipping labels negates logistic decision scores") {
  const auto data = blobs(120, 2, 1.0, 6);
  TabularDataset flipped = data;
  for (auto& v : *flipped.y) v = 1 - v;
  const auto a = train_logistic(data), b = train_logistic(flipped);
  CHECK((a->decision_function(data.X) + b->decision_function(data.X)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("probabilities are normalised for every learner") {
  const auto data = two_moons(200, 0.2, 7);
  const Eigen::MatrixXd probe = 3.0 * Eigen::MatrixXd::Random(50, 2);
  for (auto kind : {LearnerKind::random_forest, LearnerKind::extra_trees, LearnerKind::logistic}) {
    auto model = make_learner(kind, {.trees = 10}, {});
    model->fit(data.X, *data.y, 1);
    const auto p = model->predict_proba(probe);
    CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
    CHECK(p.minCoeff() >= 0.0);
    CHECK(p.maxCoeff() <= 1.0);
  }
}

TEST_CASE("tree splits match an exhaustive Gini search on small data") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    const int n = 6 + static_cast<int>(seed % 7);
    Eigen::MatrixXd X(n, 3);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < 3; ++j) X(i, j) = u(rng);
      y[static_cast<std::size_t>(i)] = u(rng) < 0.5;
    }
    DecisionTree tree({.rule = SplitRule::best, .max_features = 3, .max_depth = 3});
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    tree.fit(X, y, rows, seed);
    check_node_against_oracle(tree, 0, X, y, rows);
  }
}

TEST_CASE("serialisation reproduces predictions") {
  const auto data = two_moons(150, 0.25, 8);
  for (auto kind : {LearnerKind::random_forest, LearnerKind::extra_trees, LearnerKind::logistic}) {
    auto model = make_learner(kind, {.trees = 8}, {});
    model->fit(data.X, *data.y, 2);
    const auto restored = learner_from_json(nlohmann::json::parse(model->to_json().dump()));
    CHECK(restored->kind() == kind);
    CHECK(restored->predict_proba(data.X) == model->predict_proba(data.X));
  }
}

TEST_CASE("invalid inputs") {
  TabularDataset bad{Eigen::MatrixXd::Zero(2, 2), std::vector<int>{0, 2}};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad.y = std::vector<int>{0};
  CHECK_THROWS_AS(bad.validate(), DimensionError);
  bad.y = std::vector<int>{0, 1};
  bad.X(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  const auto data = two_moons(40, 0.1, 9);
  const auto rf = train_random_forest(data, 3, 1);
  CHECK_THROWS_AS(rf->predict_proba(Eigen::MatrixXd::Zero(2, 5)), DimensionError);
  CHECK_THROWS_AS(ForestConfig{.trees = 0}.validate(), ConfigError);
}

TEST_CASE("binary metrics") {
  const std::vector<int> truth{1, 1, 0, 0, 1}, predicted{1, 0, 1, 0, 1};
  const auto m = evaluate(truth, predicted);
  CHECK(m.true_positive == 2);
  CHECK(m.false_positive == 1);
  CHECK(m.false_negative == 1);
  CHECK(m.precision == doctest::Approx(2.0 / 3));
  CHECK(m.recall == doctest::Approx(2.0 / 3));
  CHECK(m.f1 == doctest::Approx(2.0 / 3));
  CHECK(m.accuracy == doctest::Approx(0.6));
  const auto none = evaluate(std::vector<int>{0, 0}, std::vector<int>{0, 0});
  CHECK(none.f1 == 0.0);
  CHECK(argmax_labels((Eigen::MatrixX2d(2, 2) << 0.5, 0.5, 0.4, 0.6).finished()) == std::vector<int>{0, 1});
}
