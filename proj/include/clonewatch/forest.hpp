#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace clonewatch::forest {

/// Binary-labelled (or unlabelled) feature table.
struct TabularDataset {
  Eigen::MatrixXd X;
  std::optional<std::vector<int>> y;

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }
  const std::vector<int>& labels() const;
  /// Throws ValidationError on non-finite values or labels outside {0,1},
  /// DimensionError when the label count differs from the row count.
  void validate() const;
  TabularDataset subset(std::span<const Eigen::Index> rows) const;
};

enum class SplitRule {
  best,    ///< CART: best Gini threshold per candidate feature
  random,  ///< extremely randomised: one uniform threshold per candidate feature
};

struct TreeConfig {
  SplitRule rule = SplitRule::best;
  int max_features = 0;  ///< 0 means floor(sqrt(d)), at least 1
  int max_depth = 0;     ///< 0 means unlimited
  int min_samples_leaf = 1;
};

/// Flat binary tree. Leaves have feature == -1; rows with x[feature] <= threshold go left.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double positive_fraction = 0.0;
  std::int32_t samples = 0;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(TreeConfig config) : config_(config) {}

  /// Fits on the rows listed in `sample_rows` (duplicates allowed).
  void fit(const Eigen::MatrixXd& X, std::span<const int> y, std::vector<Eigen::Index> sample_rows,
           std::uint64_t seed);
  double predict_positive(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  nlohmann::json to_json() const;
  static DecisionTree from_json(const nlohmann::json& j);

 private:
  TreeConfig config_;
  std::vector<TreeNode> nodes_;
};

/// Gini impurity of a node holding `positives` out of `total`.
double gini(double positives, double total);

enum class LearnerKind { random_forest, extra_trees, logistic };

std::string_view to_string(LearnerKind k);
LearnerKind parse_learner_kind(std::string_view s);

struct ForestConfig {
  int trees = 50;
  int max_features = 0;
  int max_depth = 0;
  int min_samples_leaf = 1;
  void validate() const;
};

struct LogisticConfig {
  double l2 = 1e-4;
  int max_epochs = 500;
  double tolerance = 1e-6;
  void validate() const;
};

/// Common interface of the cascade's base learners. predict_proba returns
/// n x 2 with columns (P(class 0), P(class 1)). Single-class training data
/// yields a model that always predicts that class with probability 1.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual LearnerKind kind() const = 0;
  virtual void fit(const Eigen::MatrixXd& X, std::span<const int> y, std::uint64_t seed) = 0;
  virtual Eigen::MatrixX2d predict_proba(const Eigen::MatrixXd& X) const = 0;
  virtual nlohmann::json to_json() const = 0;
  Eigen::Index input_width() const { return input_width_; }

 protected:
  void check_width(const Eigen::MatrixXd& X) const;
  Eigen::Index input_width_ = 0;
};

/// Bagged CART trees (bootstrap = true) or extremely randomised trees
/// (SplitRule::random, bootstrap = false).
class TreeEnsemble final : public Learner {
 public:
  TreeEnsemble(LearnerKind kind, ForestConfig config);
  LearnerKind kind() const override { return kind_; }
  void fit(const Eigen::MatrixXd& X, std::span<const int> y, std::uint64_t seed) override;
  Eigen::MatrixX2d predict_proba(const Eigen::MatrixXd& X) const override;
  nlohmann::json to_json() const override;
  static std::unique_ptr<TreeEnsemble> from_json(const nlohmann::json& j);
  const std::vector<DecisionTree>& trees() const { return trees_; }

 private:
  LearnerKind kind_;
  ForestConfig config_;
  std::vector<DecisionTree> trees_;
};

/// L2-penalised logistic regression on min-max-normalised inputs, fitted by
/// full-batch gradient descent with backtracking line search.
class LogisticRegression final : public Learner {
 public:
  explicit LogisticRegression(LogisticConfig config = {});
  LearnerKind kind() const override { return LearnerKind::logistic; }
  void fit(const Eigen::MatrixXd& X, std::span<const int> y, std::uint64_t seed) override;
  Eigen::MatrixX2d predict_proba(const Eigen::MatrixXd& X) const override;
  /// Log-odds of class 1.
  Eigen::VectorXd decision_function(const Eigen::MatrixXd& X) const;
  nlohmann::json to_json() const override;
  static std::unique_ptr<LogisticRegression> from_json(const nlohmann::json& j);

  const Eigen::VectorXd& weights() const { return weights_; }
  double bias() const { return bias_; }
  int epochs_run() const { return epochs_run_; }

 private:
  Eigen::MatrixXd normalise(const Eigen::MatrixXd& X) const;

  LogisticConfig config_;
  Eigen::RowVectorXd offset_, scale_;
  Eigen::VectorXd weights_;
  double bias_ = 0.0;
  std::optional<int> constant_class_;
  int epochs_run_ = 0;
};

std::unique_ptr<Learner> make_learner(LearnerKind kind, const ForestConfig& forest,
                                      const LogisticConfig& logistic);
std::unique_ptr<Learner> learner_from_json(const nlohmann::json& j);

std::unique_ptr<TreeEnsemble> train_random_forest(const TabularDataset& data, int trees, std::uint64_t seed);
std::unique_ptr<TreeEnsemble> train_extra_trees(const TabularDataset& data, int trees, std::uint64_t seed);
std::unique_ptr<LogisticRegression> train_logistic(const TabularDataset& data, const LogisticConfig& config = {});

/// Class-1 label where P(class 1) > P(class 0); ties go to class 0.
std::vector<int> argmax_labels(const Eigen::MatrixX2d& proba);

struct BinaryMetrics {
  double precision = 0, recall = 0, f1 = 0, accuracy = 0;
  std::size_t true_positive = 0, false_positive = 0, false_negative = 0, true_negative = 0;
};
/// Class 1 is the positive class. Precision/recall/F1 are 0 when undefined.
BinaryMetrics evaluate(std::span<const int> truth, std::span<const int> predicted);
nlohmann::json to_json(const BinaryMetrics& m);

}  // namespace clonewatch::forest
