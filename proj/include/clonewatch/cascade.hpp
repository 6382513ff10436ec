#pragma once

#include <filesystem>
#include <memory>

#include "clonewatch/forest.hpp"

namespace clonewatch::forest {

enum class CascadeVariant { mixed, rf_only, ert_only, lr_only };

std::string_view to_string(CascadeVariant v);
CascadeVariant parse_cascade_variant(std::string_view s);

/// The four learner slots of one layer: (RF, RF, ERT, LR) for the mixed
/// cascade, or four copies of a single kind.
std::array<LearnerKind, 4> layer_learners(CascadeVariant v);

inline constexpr Eigen::Index kAugmentedWidth = 8;

struct CascadeConfig {
  CascadeVariant variant = CascadeVariant::mixed;
  int folds = 5;
  int max_layers = 20;
  double min_improvement = 1e-4;
  int patience = 1;
  ForestConfig forest;
  LogisticConfig logistic;
  std::uint64_t seed = 0;
  void validate() const;
};

/// Per slot, one model per cross-validation fold; predictions average the folds.
struct CascadeLayer {
  std::array<std::vector<std::shared_ptr<const Learner>>, 4> slots;
  Eigen::Index input_width = 0;
};

class CascadeModel {
 public:
  struct Prediction {
    Eigen::MatrixX2d proba;
    std::vector<int> labels;
  };

  /// Throws DimensionError when X's width differs from training.
  Prediction predict(const Eigen::MatrixXd& X) const;

  const std::vector<CascadeLayer>& layers() const { return layers_; }
  /// Index of the last retained layer.
  std::size_t stop_layer() const { return layers_.size() - 1; }
  /// Validation F1 of every layer grown, including any discarded after stop_layer.
  const std::vector<double>& validation_history() const { return validation_history_; }
  Eigen::Index input_width() const { return layers_.empty() ? 0 : layers_.front().input_width; }
  const CascadeConfig& config() const { return config_; }

  nlohmann::json to_json() const;
  static CascadeModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static CascadeModel load(const std::filesystem::path& path);

 private:
  friend CascadeModel train_cascade(const TabularDataset&, const TabularDataset&, const CascadeConfig&);
  CascadeConfig config_;
  std::vector<CascadeLayer> layers_;
  std::vector<double> validation_history_;
};

/// Grows layers until validation F1 improves by less than min_improvement
/// for `patience` consecutive layers, or max_layers is reached, then keeps
/// layers up to the last one attaining the best validation F1.
/// Training augmentation uses out-of-fold probabilities; validation and
/// later inputs use the average of the fold models.
CascadeModel train_cascade(const TabularDataset& train, const TabularDataset& valid, const CascadeConfig& config);

/// Stratified split; the second part receives round(fraction * n_c) rows of each class c.
std::pair<TabularDataset, TabularDataset> stratified_split(const TabularDataset& data, double fraction,
                                                           std::uint64_t seed);

/// Stratified fold index per row, in [0, folds).
std::vector<int> stratified_folds(std::span<const int> y, int folds, std::uint64_t seed);

}  // namespace clonewatch::forest
