#include <algorithm>
#include <cmath>
#include <numeric>

#include "clonewatch/errors.hpp"
#include "clonewatch/forest.hpp"
#include "clonewatch/rng.hpp"

namespace clonewatch::forest {

const std::vector<int>& TabularDataset::labels() const {
  if (!y) throw ValidationError("dataset has no labels");
  return *y;
}

void TabularDataset::validate() const {
  if (!X.allFinite()) throw ValidationError("dataset contains NaN or Inf");
  if (!y) return;
  if (static_cast<Eigen::Index>(y->size()) != X.rows()) throw DimensionError("one label per row required");
  for (int v : *y)
    if (v != 0 && v != 1) throw ValidationError("labels must be 0 or 1");
}

TabularDataset TabularDataset::subset(std::span<const Eigen::Index> rows) const {
  TabularDataset out;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  if (y) out.y.emplace();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
    if (y) out.y->push_back((*y)[static_cast<std::size_t>(rows[i])]);
  }
  return out;
}

std::string_view to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::random_forest: return "random_forest";
    case LearnerKind::extra_trees: return "extra_trees";
    case LearnerKind::logistic: return "logistic";
  }
  return "?";
}

LearnerKind parse_learner_kind(std::string_view s) {
  if (s == "random_forest") return LearnerKind::random_forest;
  if (s == "extra_trees") return LearnerKind::extra_trees;
  if (s == "logistic") return LearnerKind::logistic;
  throw DecodeError("unknown learner kind: " + std::string(s));
}

void ForestConfig::validate() const {
  if (trees < 1) throw ConfigError("forest: trees must be >= 1");
  if (max_features < 0 || max_depth < 0 || min_samples_leaf < 1)
    throw ConfigError("forest: invalid tree limits");
}

void LogisticConfig::validate() const {
  if (l2 < 0 || max_epochs < 1 || tolerance < 0) throw ConfigError("logistic: invalid configuration");
}

void Learner::check_width(const Eigen::MatrixXd& X) const {
  if (X.cols() != input_width_)
    throw DimensionError("expected " + std::to_string(input_width_) + " features, got " + std::to_string(X.cols()));
}

namespace {

void check_training_input(const Eigen::MatrixXd& X, std::span<const int> y) {
  if (X.rows() == 0) throw ValidationError("no training rows");
  if (static_cast<Eigen::Index>(y.size()) != X.rows()) throw DimensionError("one label per row required");
  if (!X.allFinite()) throw ValidationError("training data contains NaN or Inf");
  for (int v : y)
    if (v != 0 && v != 1) throw ValidationError("labels must be 0 or 1");
}

Eigen::MatrixX2d two_column(const Eigen::VectorXd& p1) {
  Eigen::MatrixX2d out(p1.size(), 2);
  out.col(1) = p1;
  out.col(0) = (1.0 - p1.array()).matrix();
  return out;
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

TreeEnsemble::TreeEnsemble(LearnerKind kind, ForestConfig config) : kind_(kind), config_(config) {
  if (kind == LearnerKind::logistic) throw ConfigError("tree ensemble cannot be logistic");
  config_.validate();
}

void TreeEnsemble::fit(const Eigen::MatrixXd& X, std::span<const int> y, std::uint64_t seed) {
  check_training_input(X, y);
  input_width_ = X.cols();
  const bool bootstrap = kind_ == LearnerKind::random_forest;
  TreeConfig tc;
  tc.rule = bootstrap ? SplitRule::best : SplitRule::random;
  tc.max_features = config_.max_features;
  tc.max_depth = config_.max_depth;
  tc.min_samples_leaf = config_.min_samples_leaf;

  const auto n = static_cast<std::size_t>(X.rows());
  trees_.assign(static_cast<std::size_t>(config_.trees), DecisionTree(tc));
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    const std::uint64_t tree_seed = derive_seed(seed, t);
    std::vector<Eigen::Index> rows(n);
    if (bootstrap) {
      Rng rng(derive_seed(tree_seed, 0xb007));
      for (auto& r : rows) r = static_cast<Eigen::Index>(uniform_index(rng, n));
    } else {
      std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    }
    trees_[t].fit(X, y, std::move(rows), tree_seed);
  }
}

Eigen::MatrixX2d TreeEnsemble::predict_proba(const Eigen::MatrixXd& X) const {
  if (trees_.empty()) throw ValidationError("forest is not trained");
  check_width(X);
  Eigen::VectorXd p1 = Eigen::VectorXd::Zero(X.rows());
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    double s = 0;
    for (const auto& t : trees_) s += t.predict_positive(X.row(r));
    p1[r] = s / static_cast<double>(trees_.size());
  }
  return two_column(p1);
}

nlohmann::json TreeEnsemble::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  return {{"kind", to_string(kind_)},
          {"input_width", input_width_},
          {"config",
           {{"trees", config_.trees},
            {"max_features", config_.max_features},
            {"max_depth", config_.max_depth},
            {"min_samples_leaf", config_.min_samples_leaf}}},
          {"trees", std::move(trees)}};
}

std::unique_ptr<TreeEnsemble> TreeEnsemble::from_json(const nlohmann::json& j) {
  ForestConfig c;
  const auto& jc = j.at("config");
  c.trees = jc.at("trees").get<int>();
  c.max_features = jc.at("max_features").get<int>();
  c.max_depth = jc.at("max_depth").get<int>();
  c.min_samples_leaf = jc.at("min_samples_leaf").get<int>();
  auto out = std::make_unique<TreeEnsemble>(parse_learner_kind(j.at("kind").get<std::string>()), c);
  out->input_width_ = j.at("input_width").get<Eigen::Index>();
  for (const auto& t : j.at("trees")) out->trees_.push_back(DecisionTree::from_json(t));
  return out;
}

LogisticRegression::LogisticRegression(LogisticConfig config) : config_(config) { config_.validate(); }

Eigen::MatrixXd LogisticRegression::normalise(const Eigen::MatrixXd& X) const {
  return ((X.rowwise() - offset_).array().rowwise() / scale_.array()).matrix();
}

void LogisticRegression::fit(const Eigen::MatrixXd& X, std::span<const int> y, std::uint64_t /*seed*/) {
  check_training_input(X, y);
  input_width_ = X.cols();
  const Eigen::Index n = X.rows(), d = X.cols();
  offset_ = X.colwise().minCoeff();
  scale_ = X.colwise().maxCoeff() - offset_;
  for (Eigen::Index c = 0; c < d; ++c)
    if (!(scale_[c] > 0)) scale_[c] = 1.0;
  weights_ = Eigen::VectorXd::Zero(d);
  bias_ = 0;
  epochs_run_ = 0;
  constant_class_.reset();

  const auto positives = std::count(y.begin(), y.end(), 1);
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(n)) {
    constant_class_ = positives == 0 ? 0 : 1;
    return;
  }

  const Eigen::MatrixXd Z = normalise(X);
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) target[i] = y[static_cast<std::size_t>(i)];
  const double inv_n = 1.0 / static_cast<double>(n);

  auto loss = [&](const Eigen::VectorXd& w, double b) {
    const Eigen::VectorXd z = (Z * w).array() + b;
    double s = 0;
    for (Eigen::Index i = 0; i < n; ++i) s += softplus(z[i]) - target[i] * z[i];
    return s * inv_n + 0.5 * config_.l2 * w.squaredNorm();
  };

  double current = loss(weights_, bias_);
  double step = 1.0;
  for (int epoch = 0; epoch < config_.max_epochs; ++epoch) {
    const Eigen::VectorXd z = (Z * weights_).array() + bias_;
    Eigen::VectorXd residual(n);
    for (Eigen::Index i = 0; i < n; ++i) residual[i] = sigmoid(z[i]) - target[i];
    const Eigen::VectorXd gw = Z.transpose() * residual * inv_n + config_.l2 * weights_;
    const double gb = residual.sum() * inv_n;
    const double gnorm2 = gw.squaredNorm() + gb * gb;
    epochs_run_ = epoch + 1;
    if (gnorm2 == 0) break;

    // Armijo backtracking from a step slightly larger than the last accepted one.
    step = std::min(step * 2.0, 1e4);
    Eigen::VectorXd w_next;
    double b_next = 0, next = 0;
    for (int tries = 0; tries < 60; ++tries) {
      w_next = weights_ - step * gw;
      b_next = bias_ - step * gb;
      next = loss(w_next, b_next);
      if (next <= current - 1e-4 * step * gnorm2) break;
      step *= 0.5;
    }
    if (!(next < current)) break;
    weights_ = std::move(w_next);
    bias_ = b_next;
    const double improvement = current - next;
    current = next;
    if (improvement < config_.tolerance) break;
  }
}

Eigen::VectorXd LogisticRegression::decision_function(const Eigen::MatrixXd& X) const {
  check_width(X);
  if (constant_class_) {
    const double inf = std::numeric_limits<double>::infinity();
    return Eigen::VectorXd::Constant(X.rows(), *constant_class_ == 1 ? inf : -inf);
  }
  return (normalise(X) * weights_).array() + bias_;
}

Eigen::MatrixX2d LogisticRegression::predict_proba(const Eigen::MatrixXd& X) const {
  const Eigen::VectorXd z = decision_function(X);
  Eigen::VectorXd p1(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) p1[i] = sigmoid(z[i]);
  return two_column(p1);
}

nlohmann::json LogisticRegression::to_json() const {
  auto vec = [](const auto& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json j = {{"kind", "logistic"},
                      {"input_width", input_width_},
                      {"config", {{"l2", config_.l2}, {"max_epochs", config_.max_epochs}, {"tolerance", config_.tolerance}}},
                      {"offset", vec(offset_)},
                      {"scale", vec(scale_)},
                      {"weights", vec(weights_)},
                      {"bias", bias_}};
  j["constant_class"] = constant_class_ ? nlohmann::json(*constant_class_) : nlohmann::json(nullptr);
  return j;
}

std::unique_ptr<LogisticRegression> LogisticRegression::from_json(const nlohmann::json& j) {
  LogisticConfig c;
  c.l2 = j.at("config").at("l2").get<double>();
  c.max_epochs = j.at("config").at("max_epochs").get<int>();
  c.tolerance = j.at("config").at("tolerance").get<double>();
  auto out = std::make_unique<LogisticRegression>(c);
  out->input_width_ = j.at("input_width").get<Eigen::Index>();
  auto load = [](const nlohmann::json& a) {
    const auto v = a.get<std::vector<double>>();
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  out->offset_ = load(j.at("offset")).transpose();
  out->scale_ = load(j.at("scale")).transpose();
  out->weights_ = load(j.at("weights"));
  out->bias_ = j.at("bias").get<double>();
  if (!j.at("constant_class").is_null()) out->constant_class_ = j.at("constant_class").get<int>();
  if (out->offset_.size() != out->input_width_ || out->scale_.size() != out->input_width_ ||
      out->weights_.size() != out->input_width_)
    throw DecodeError("logistic: parameter width mismatch");
  return out;
}

std::unique_ptr<Learner> make_learner(LearnerKind kind, const ForestConfig& forest, const LogisticConfig& logistic) {
  if (kind == LearnerKind::logistic) return std::make_unique<LogisticRegression>(logistic);
  return std::make_unique<TreeEnsemble>(kind, forest);
}

std::unique_ptr<Learner> learner_from_json(const nlohmann::json& j) {
  if (parse_learner_kind(j.at("kind").get<std::string>()) == LearnerKind::logistic)
    return LogisticRegression::from_json(j);
  return TreeEnsemble::from_json(j);
}

std::unique_ptr<TreeEnsemble> train_random_forest(const TabularDataset& data, int trees, std::uint64_t seed) {
  data.validate();
  ForestConfig c;
  c.trees = trees;
  auto m = std::make_unique<TreeEnsemble>(LearnerKind::random_forest, c);
  m->fit(data.X, data.labels(), seed);
  return m;
}

std::unique_ptr<TreeEnsemble> train_extra_trees(const TabularDataset& data, int trees, std::uint64_t seed) {
  data.validate();
  ForestConfig c;
  c.trees = trees;
  auto m = std::make_unique<TreeEnsemble>(LearnerKind::extra_trees, c);
  m->fit(data.X, data.labels(), seed);
  return m;
}

std::unique_ptr<LogisticRegression> train_logistic(const TabularDataset& data, const LogisticConfig& config) {
  data.validate();
  auto m = std::make_unique<LogisticRegression>(config);
  m->fit(data.X, data.labels(), 0);
  return m;
}

std::vector<int> argmax_labels(const Eigen::MatrixX2d& proba) {
  std::vector<int> out(static_cast<std::size_t>(proba.rows()));
  for (Eigen::Index i = 0; i < proba.rows(); ++i) out[static_cast<std::size_t>(i)] = proba(i, 1) > proba(i, 0) ? 1 : 0;
  return out;
}

BinaryMetrics evaluate(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw DimensionError("truth and prediction lengths differ");
  BinaryMetrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == 1)
      (predicted[i] == 1 ? m.true_positive : m.false_negative)++;
    else
      (predicted[i] == 1 ? m.false_positive : m.true_negative)++;
  }
  const auto tp = static_cast<double>(m.true_positive);
  const double pp = tp + static_cast<double>(m.false_positive);
  const double ap = tp + static_cast<double>(m.false_negative);
  m.precision = pp > 0 ? tp / pp : 0.0;
  m.recall = ap > 0 ? tp / ap : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  m.accuracy = truth.empty() ? 0.0 : (tp + static_cast<double>(m.true_negative)) / static_cast<double>(truth.size());
  return m;
}

nlohmann::json to_json(const BinaryMetrics& m) {
  return {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"accuracy", m.accuracy},
          {"tp", m.true_positive},    {"fp", m.false_positive}, {"fn", m.false_negative}, {"tn", m.true_negative}};
}

}  // namespace clonewatch::forest
