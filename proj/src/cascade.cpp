#include <fstream>

#include "clonewatch/cascade.hpp"
#include "clonewatch/errors.hpp"
#include "clonewatch/rng.hpp"

namespace clonewatch::forest {

std::string_view to_string(CascadeVariant v) {
  switch (v) {
    case CascadeVariant::mixed: return "mixed";
    case CascadeVariant::rf_only: return "rf_only";
    case CascadeVariant::ert_only: return "ert_only";
    case CascadeVariant::lr_only: return "lr_only";
  }
  return "?";
}

CascadeVariant parse_cascade_variant(std::string_view s) {
  if (s == "mixed") return CascadeVariant::mixed;
  if (s == "rf_only") return CascadeVariant::rf_only;
  if (s == "ert_only") return CascadeVariant::ert_only;
  if (s == "lr_only") return CascadeVariant::lr_only;
  throw ConfigError("unknown cascade variant: " + std::string(s));
}

std::array<LearnerKind, 4> layer_learners(CascadeVariant v) {
  using K = LearnerKind;
  switch (v) {
    case CascadeVariant::rf_only: return {K::random_forest, K::random_forest, K::random_forest, K::random_forest};
    case CascadeVariant::ert_only: return {K::extra_trees, K::extra_trees, K::extra_trees, K::extra_trees};
    case CascadeVariant::lr_only: return {K::logistic, K::logistic, K::logistic, K::logistic};
    case CascadeVariant::mixed: break;
  }
  return {K::random_forest, K::random_forest, K::extra_trees, K::logistic};
}

void CascadeConfig::validate() const {
  if (folds < 2) throw ConfigError("cascade: folds must be >= 2");
  if (max_layers < 1) throw ConfigError("cascade: max_layers must be >= 1");
  if (patience < 1) throw ConfigError("cascade: patience must be >= 1");
  if (!(min_improvement >= 0)) throw ConfigError("cascade: min_improvement must be >= 0");
  forest.validate();
  logistic.validate();
}

std::vector<int> stratified_folds(std::span<const int> y, int folds, std::uint64_t seed) {
  std::vector<int> fold(y.size(), 0);
  Rng rng(derive_seed(seed, 0xf01d));
  int next = 0;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == cls) idx.push_back(i);
    shuffle(idx, rng);
    for (auto i : idx) {
      fold[i] = next;
      next = (next + 1) % folds;
    }
  }
  return fold;
}

std::pair<TabularDataset, TabularDataset> stratified_split(const TabularDataset& data, double fraction,
                                                           std::uint64_t seed) {
  if (!(fraction > 0 && fraction < 1)) throw ConfigError("split fraction must lie in (0, 1)");
  const auto& y = data.labels();
  Rng rng(derive_seed(seed, 0x5971));
  std::vector<Eigen::Index> keep, held;
  for (int cls : {0, 1}) {
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (y[i] == cls) idx.push_back(static_cast<Eigen::Index>(i));
    shuffle(idx, rng);
    const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    held.insert(held.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take));
    keep.insert(keep.end(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end());
  }
  std::sort(keep.begin(), keep.end());
  std::sort(held.begin(), held.end());
  return {data.subset(keep), data.subset(held)};
}

namespace {

Eigen::MatrixX2d slot_proba(const std::vector<std::shared_ptr<const Learner>>& models, const Eigen::MatrixXd& X) {
  Eigen::MatrixX2d sum = Eigen::MatrixX2d::Zero(X.rows(), 2);
  for (const auto& m : models) sum += m->predict_proba(X);
  return sum / static_cast<double>(models.size());
}

Eigen::MatrixXd with_augmented(const Eigen::MatrixXd& X, const Eigen::MatrixXd& augmented) {
  Eigen::MatrixXd out(X.rows(), X.cols() + augmented.cols());
  out << X, augmented;
  return out;
}

/// Returns the 8-wide augmented block and the mean class-probability of the layer.
std::pair<Eigen::MatrixXd, Eigen::MatrixX2d> layer_outputs(const CascadeLayer& layer, const Eigen::MatrixXd& input) {
  Eigen::MatrixXd block(input.rows(), kAugmentedWidth);
  Eigen::MatrixX2d mean = Eigen::MatrixX2d::Zero(input.rows(), 2);
  for (std::size_t s = 0; s < layer.slots.size(); ++s) {
    const Eigen::MatrixX2d p = slot_proba(layer.slots[s], input);
    block.middleCols(static_cast<Eigen::Index>(2 * s), 2) = p;
    mean += p;
  }
  return {block, mean / 4.0};
}

bool has_both_classes(std::span<const int> y) {
  const auto pos = std::count(y.begin(), y.end(), 1);
  return pos > 0 && pos < static_cast<std::ptrdiff_t>(y.size());
}

}  // namespace

CascadeModel train_cascade(const TabularDataset& train, const TabularDataset& valid, const CascadeConfig& config) {
  config.validate();
  train.validate();
  valid.validate();
  if (train.rows() == 0 || valid.rows() == 0) throw ValidationError("cascade: empty training or validation set");
  if (train.cols() != valid.cols()) throw DimensionError("cascade: train and valid widths differ");
  const auto& y = train.labels();
  const auto& yv = valid.labels();
  if (!has_both_classes(y)) throw ValidationError("cascade: training set must contain both classes");
  if (!has_both_classes(yv)) throw ValidationError("cascade: validation set must contain both classes");

  const int folds = static_cast<int>(std::min<Eigen::Index>(config.folds, train.rows()));
  const auto fold_of = stratified_folds(y, folds, config.seed);
  std::vector<std::vector<Eigen::Index>> fit_rows(static_cast<std::size_t>(folds)), held_rows(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < fold_of.size(); ++i)
    for (int f = 0; f < folds; ++f)
      (fold_of[i] == f ? held_rows : fit_rows)[static_cast<std::size_t>(f)].push_back(static_cast<Eigen::Index>(i));

  const auto kinds = layer_learners(config.variant);
  CascadeModel model;
  model.config_ = config;
  Eigen::MatrixXd train_in = train.X, valid_in = valid.X;
  double best = -1.0;
  std::size_t best_layer = 0;
  int stale = 0;

  for (int layer_index = 0; layer_index < config.max_layers; ++layer_index) {
    CascadeLayer layer;
    layer.input_width = train_in.cols();
    Eigen::MatrixXd oof(train.rows(), kAugmentedWidth);
    for (std::size_t s = 0; s < kinds.size(); ++s) {
      for (int f = 0; f < folds; ++f) {
        const auto& rows = fit_rows[static_cast<std::size_t>(f)];
        const auto& held = held_rows[static_cast<std::size_t>(f)];
        Eigen::MatrixXd Xf(static_cast<Eigen::Index>(rows.size()), train_in.cols());
        std::vector<int> yf(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
          Xf.row(static_cast<Eigen::Index>(r)) = train_in.row(rows[r]);
          yf[r] = y[static_cast<std::size_t>(rows[r])];
        }
        auto learner = make_learner(kinds[s], config.forest, config.logistic);
        learner->fit(Xf, yf, derive_seed(config.seed, static_cast<std::uint64_t>(layer_index) * 64 + s, static_cast<std::uint64_t>(f)));
        Eigen::MatrixXd Xh(static_cast<Eigen::Index>(held.size()), train_in.cols());
        for (std::size_t r = 0; r < held.size(); ++r) Xh.row(static_cast<Eigen::Index>(r)) = train_in.row(held[r]);
        const Eigen::MatrixX2d ph = learner->predict_proba(Xh);
        for (std::size_t r = 0; r < held.size(); ++r)
          oof.block(held[r], static_cast<Eigen::Index>(2 * s), 1, 2) = ph.row(static_cast<Eigen::Index>(r));
        layer.slots[s].push_back(std::move(learner));
      }
    }
    auto [valid_block, valid_mean] = layer_outputs(layer, valid_in);
    const double f1 = evaluate(yv, argmax_labels(valid_mean)).f1;
    model.validation_history_.push_back(f1);
    model.layers_.push_back(std::move(layer));

    const bool improved = f1 - best >= config.min_improvement || layer_index == 0;
    if (f1 >= best) {
      best = f1;
      best_layer = static_cast<std::size_t>(layer_index);
    }
    stale = improved ? 0 : stale + 1;
    if (stale >= config.patience) break;

    train_in = with_augmented(train.X, oof);
    valid_in = with_augmented(valid.X, valid_block);
  }
  model.layers_.resize(best_layer + 1);
  return model;
}

CascadeModel::Prediction CascadeModel::predict(const Eigen::MatrixXd& X) const {
  if (layers_.empty()) throw ValidationError("cascade is not trained");
  if (X.cols() != input_width())
    throw DimensionError("cascade expects " + std::to_string(input_width()) + " features, got " + std::to_string(X.cols()));
  if (!X.allFinite()) throw ValidationError("cascade input contains NaN or Inf");
  Eigen::MatrixXd input = X;
  Eigen::MatrixX2d mean;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    auto [block, m] = layer_outputs(layers_[l], input);
    mean = std::move(m);
    if (l + 1 < layers_.size()) input = with_augmented(X, block);
  }
  return {mean, argmax_labels(mean)};
}

nlohmann::json CascadeModel::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : layers_) {
    nlohmann::json slots = nlohmann::json::array();
    for (const auto& slot : l.slots) {
      nlohmann::json models = nlohmann::json::array();
      for (const auto& m : slot) models.push_back(m->to_json());
      slots.push_back(std::move(models));
    }
    layers.push_back({{"input_width", l.input_width}, {"slots", std::move(slots)}});
  }
  return {{"format", "clonewatch-cascade"},
          {"version", 1},
          {"config",
           {{"variant", to_string(config_.variant)},
            {"folds", config_.folds},
            {"max_layers", config_.max_layers},
            {"min_improvement", config_.min_improvement},
            {"patience", config_.patience},
            {"trees", config_.forest.trees},
            {"seed", config_.seed}}},
          {"validation_history", validation_history_},
          {"layers", std::move(layers)}};
}

CascadeModel CascadeModel::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "clonewatch-cascade" || j.value("version", 0) != 1)
    throw DecodeError("not a version-1 cascade model");
  CascadeModel m;
  const auto& c = j.at("config");
  m.config_.variant = parse_cascade_variant(c.at("variant").get<std::string>());
  m.config_.folds = c.at("folds").get<int>();
  m.config_.max_layers = c.at("max_layers").get<int>();
  m.config_.min_improvement = c.at("min_improvement").get<double>();
  m.config_.patience = c.at("patience").get<int>();
  m.config_.forest.trees = c.at("trees").get<int>();
  m.config_.seed = c.at("seed").get<std::uint64_t>();
  m.validation_history_ = j.at("validation_history").get<std::vector<double>>();
  for (const auto& jl : j.at("layers")) {
    CascadeLayer layer;
    layer.input_width = jl.at("input_width").get<Eigen::Index>();
    const auto& slots = jl.at("slots");
    if (slots.size() != 4) throw DecodeError("cascade layer must have 4 slots");
    for (std::size_t s = 0; s < 4; ++s)
      for (const auto& jm : slots[s]) layer.slots[s].push_back(learner_from_json(jm));
    m.layers_.push_back(std::move(layer));
  }
  if (m.layers_.empty()) throw DecodeError("cascade has no layers");
  return m;
}

void CascadeModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json().dump();
}

CascadeModel CascadeModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("malformed cascade model: ") + e.what());
  }
}

}  // namespace clonewatch::forest
