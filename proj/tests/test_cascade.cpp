#include <doctest.h>

#include <filesystem>

#include "clonewatch/cascade.hpp"
#include "clonewatch/errors.hpp"
#include "datasets.hpp"

using namespace clonewatch;
using namespace clonewatch::forest;
using namespace clonewatch::testdata;

namespace {

CascadeConfig quick(CascadeVariant variant = CascadeVariant::mixed, std::uint64_t seed = 1) {
  CascadeConfig c;
  c.variant = variant;
  c.forest.trees = 15;
  c.max_layers = 6;
  c.seed = seed;
  return c;
}

void check_structure(const CascadeModel& model, Eigen::Index d) {
  REQUIRE_FALSE(model.layers().empty());
  CHECK(model.layers().front().input_width == d);
  for (std::size_t l = 1; l < model.layers().size(); ++l)
    CHECK(model.layers()[l].input_width == d + kAugmentedWidth);
  CHECK(model.validation_history().size() <= static_cast<std::size_t>(model.config().max_layers));
  CHECK(model.stop_layer() < model.validation_history().size());
  for (const auto& layer : model.layers())
    for (const auto& slot : layer.slots) CHECK(slot.size() == static_cast<std::size_t>(model.config().folds));
}

}  // namespace

TEST_CASE("layer learners") {
  using K = LearnerKind;
  CHECK(layer_learners(CascadeVariant::mixed) ==
        std::array{K::random_forest, K::random_forest, K::extra_trees, K::logistic});
  CHECK(layer_learners(CascadeVariant::lr_only) == std::array{K::logistic, K::logistic, K::logistic, K::logistic});
  CHECK(parse_cascade_variant("ert_only") == CascadeVariant::ert_only);
  CHECK(kAugmentedWidth == 8);
}

TEST_CASE("every layer after the first reads d + 8 columns") {
  for (auto variant : {CascadeVariant::mixed, CascadeVariant::rf_only, CascadeVariant::ert_only,
                       CascadeVariant::lr_only}) {
    const auto [train, valid] = stratified_split(xor_data(300, 3, 2), 0.3, 5);
    auto cfg = quick(variant);
    cfg.max_layers = 3;
    cfg.patience = 3;
    const auto model = train_cascade(train, valid, cfg);
    check_structure(model, 5);
    CHECK(model.validation_history().size() == 3);
  }
}

TEST_CASE("equal validation F1 stops growth after one extra layer") {
  const auto [train, valid] = stratified_split(blobs(200, 2, 12.0, 3), 0.3, 1);
  const auto model = train_cascade(train, valid, quick());
  REQUIRE(model.validation_history().size() == 2);
  CHECK(model.validation_history()[0] == 1.0);
  CHECK(model.validation_history()[1] == 1.0);
  CHECK(model.stop_layer() == 1);
}

TEST_CASE("history improves up to the stop layer") {
  const auto [train, valid] = stratified_split(two_moons(600, 0.3, 4), 0.3, 2);
  const auto model = train_cascade(train, valid, quick());
  const auto& h = model.validation_history();
  for (std::size_t l = 1; l <= model.stop_layer(); ++l) CHECK(h[l] >= h[l - 1] - 1e-12);
  for (std::size_t l = model.stop_layer() + 1; l < h.size(); ++l) CHECK(h[l] <= h[model.stop_layer()]);
  check_structure(model, 2);
}

TEST_CASE("cascade on two moons keeps pace with its base learners") {
  const auto [train, valid] = stratified_split(two_moons(1000, 0.3, 5), 0.3, 3);
  const auto cascade = train_cascade(train, valid, quick(CascadeVariant::mixed, 2));
  const double cascade_f1 = evaluate(*valid.y, cascade.predict(valid.X).labels).f1;
  double best_single = 0;
  for (auto kind : {LearnerKind::random_forest, LearnerKind::extra_trees, LearnerKind::logistic}) {
    auto model = make_learner(kind, {.trees = 15}, {});
    model->fit(train.X, *train.y, 2);
    best_single = std::max(best_single, evaluate(*valid.y, argmax_labels(model->predict_proba(valid.X))).f1);
  }
  CHECK(cascade_f1 >= best_single - 0.02);
}

TEST_CASE("predictions are normalised, row independent and width checked") {
  const auto [train, valid] = stratified_split(xor_data(300, 1, 6), 0.3, 4);
  const auto model = train_cascade(train, valid, quick());
  const Eigen::MatrixXd probe = 1.5 * Eigen::MatrixXd::Random(40, 3);
  const auto p = model.predict(probe);
  CHECK((p.proba.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
  CHECK(p.labels == argmax_labels(p.proba));
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(40);
  perm.setIdentity();
  std::mt19937_64 rng(1);
  std::shuffle(perm.indices().data(), perm.indices().data() + 40, rng);
  const auto q = model.predict(perm * probe);
  CHECK(q.proba.isApprox(perm * p.proba, 1e-14));
  CHECK_THROWS_AS(model.predict(Eigen::MatrixXd::Zero(2, 4)), DimensionError);
  const auto train_pred = model.predict(train.X);
  for (Eigen::Index i = 0; i < train.rows(); ++i)
    if (std::abs(train.X(i, 0)) > 0.3 && std::abs(train.X(i, 1)) > 0.3)
      CHECK(train_pred.proba(i, (*train.y)[static_cast<std::size_t>(i)]) > 0.5);
}

TEST_CASE("training is reproducible and serialisation preserves predictions") {
  const auto [train, valid] = stratified_split(two_moons(300, 0.25, 7), 0.3, 5);
  const auto a = train_cascade(train, valid, quick());
  const auto b = train_cascade(train, valid, quick());
  CHECK(a.predict(valid.X).proba == b.predict(valid.X).proba);
  CHECK(a.validation_history() == b.validation_history());
  const auto path = std::filesystem::temp_directory_path() / "cw_cascade.json";
  a.save(path);
  const auto loaded = CascadeModel::load(path);
  CHECK(loaded.predict(valid.X).proba == a.predict(valid.X).proba);
  CHECK(loaded.stop_layer() == a.stop_layer());
  std::filesystem::remove(path);
}

TEST_CASE("growth never exceeds max_layers") {
  const auto [train, valid] = stratified_split(two_moons(300, 0.5, 8), 0.3, 6);
  auto cfg = quick();
  cfg.max_layers = 4;
  cfg.patience = 4;
  const auto model = train_cascade(train, valid, cfg);
  CHECK(model.validation_history().size() == 4);
  CHECK(model.layers().size() <= 4);
}

TEST_CASE("split helpers are stratified") {
  const auto data = two_moons(101, 0.1, 9);
  const auto [rest, held] = stratified_split(data, 0.2, 1);
  CHECK(rest.rows() + held.rows() == 101);
  CHECK(held.rows() == 20);
  const auto folds = stratified_folds(*data.y, 5, 2);
  std::array<std::array<int, 2>, 5> counts{};
  for (std::size_t i = 0; i < folds.size(); ++i) ++counts[static_cast<std::size_t>(folds[i])][static_cast<std::size_t>((*data.y)[i])];
  for (const auto& c : counts) {
    CHECK(c[0] >= 10);
    CHECK(c[0] <= 11);
    CHECK(c[1] == 10);
  }
}

TEST_CASE("invalid training input") {
  const auto [train, valid] = stratified_split(two_moons(100, 0.1, 10), 0.3, 7);
  TabularDataset one_class = valid;
  for (auto& v : *one_class.y) v = 0;
  CHECK_THROWS_AS(train_cascade(train, one_class, quick()), ValidationError);
  CHECK_THROWS_AS(train_cascade(one_class, valid, quick()), ValidationError);
  auto cfg = quick();
  cfg.folds = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = quick();
  cfg.max_layers = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
