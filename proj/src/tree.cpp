#include <algorithm>
#include <cmath>
#include <numeric>

#include "clonewatch/errors.hpp"
#include "clonewatch/forest.hpp"
#include "clonewatch/rng.hpp"

namespace clonewatch::forest {

double gini(double positives, double total) {
  if (total <= 0) return 0.0;
  const double p = positives / total;
  return 2.0 * p * (1.0 - p);
}

namespace {

struct Split {
  Eigen::Index feature = -1;
  double threshold = 0;
  double score = std::numeric_limits<double>::infinity();  // weighted child impurity
};

struct Frame {
  std::size_t begin, end;
  int depth;
  std::int32_t node;
};

double weighted_impurity(double pos_left, double n_left, double pos_right, double n_right) {
  return n_left * gini(pos_left, n_left) + n_right * gini(pos_right, n_right);
}

}  // namespace

void DecisionTree::fit(const Eigen::MatrixXd& X, std::span<const int> y, std::vector<Eigen::Index> rows,
                       std::uint64_t seed) {
  if (rows.empty()) throw ValidationError("tree: no training rows");
  if (static_cast<Eigen::Index>(y.size()) != X.rows()) throw DimensionError("tree: label count mismatch");
  Rng rng(seed);
  const Eigen::Index d = X.cols();
  const int max_features = config_.max_features > 0
                               ? std::min<int>(config_.max_features, static_cast<int>(d))
                               : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
  const auto min_leaf = static_cast<std::size_t>(std::max(1, config_.min_samples_leaf));

  nodes_.clear();
  nodes_.emplace_back();
  std::vector<Frame> stack{{0, rows.size(), 0, 0}};
  std::vector<Eigen::Index> features(static_cast<std::size_t>(d));
  std::vector<std::pair<double, int>> column;

  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    const std::size_t n = f.end - f.begin;
    std::size_t positives = 0;
    for (std::size_t i = f.begin; i < f.end; ++i) positives += static_cast<std::size_t>(y[static_cast<std::size_t>(rows[i])]);
    {
      TreeNode& node = nodes_[static_cast<std::size_t>(f.node)];
      node.samples = static_cast<std::int32_t>(n);
      node.positive_fraction = static_cast<double>(positives) / static_cast<double>(n);
    }
    const bool pure = positives == 0 || positives == n;
    const bool depth_capped = config_.max_depth > 0 && f.depth >= config_.max_depth;
    if (pure || depth_capped || n < 2 * min_leaf || d == 0) continue;

    std::iota(features.begin(), features.end(), Eigen::Index{0});
    Split best;
    int evaluated = 0;
    for (std::size_t fi = 0; fi < features.size() && evaluated < max_features; ++fi) {
      const std::size_t pick = fi + uniform_index(rng, features.size() - fi);
      std::swap(features[fi], features[pick]);
      const Eigen::Index feat = features[fi];

      column.clear();
      for (std::size_t i = f.begin; i < f.end; ++i)
        column.emplace_back(X(rows[i], feat), y[static_cast<std::size_t>(rows[i])]);
      auto [lo, hi] = std::minmax_element(column.begin(), column.end());
      const double vmin = lo->first, vmax = hi->first;
      if (!(vmin < vmax)) continue;  // constant here; does not count towards max_features
      ++evaluated;

      if (config_.rule == SplitRule::random) {
        double threshold = uniform_real(rng, vmin, vmax);
        if (threshold >= vmax) threshold = vmin;
        double nl = 0, pl = 0;
        for (const auto& [v, label] : column)
          if (v <= threshold) {
            nl += 1;
            pl += label;
          }
        const double nr = static_cast<double>(n) - nl;
        if (nl < static_cast<double>(min_leaf) || nr < static_cast<double>(min_leaf)) continue;
        const double score = weighted_impurity(pl, nl, static_cast<double>(positives) - pl, nr);
        if (score < best.score) best = {feat, threshold, score};
        continue;
      }

      std::sort(column.begin(), column.end());
      double pl = 0;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        pl += column[i].second;
        if (column[i].first == column[i + 1].first) continue;
        const std::size_t nl = i + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double score = weighted_impurity(pl, static_cast<double>(nl), static_cast<double>(positives) - pl,
                                               static_cast<double>(nr));
        if (score < best.score) {
          double threshold = 0.5 * (column[i].first + column[i + 1].first);
          if (threshold >= column[i + 1].first) threshold = column[i].first;
          best = {feat, threshold, score};
        }
      }
    }
    if (best.feature < 0) continue;

    auto mid = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(f.begin),
                              rows.begin() + static_cast<std::ptrdiff_t>(f.end),
                              [&](Eigen::Index r) { return X(r, best.feature) <= best.threshold; });
    const auto split_at = static_cast<std::size_t>(mid - rows.begin());
    const auto left = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    nodes_.emplace_back();
    TreeNode& node = nodes_[static_cast<std::size_t>(f.node)];
    node.feature = static_cast<std::int32_t>(best.feature);
    node.threshold = best.threshold;
    node.left = left;
    node.right = left + 1;
    stack.push_back({split_at, f.end, f.depth + 1, left + 1});
    stack.push_back({f.begin, split_at, f.depth + 1, left});
  }
}

double DecisionTree::predict_positive(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  if (nodes_.empty()) throw ValidationError("tree is not trained");
  std::size_t at = 0;
  while (nodes_[at].feature >= 0) {
    const TreeNode& n = nodes_[at];
    at = static_cast<std::size_t>(row[n.feature] <= n.threshold ? n.left : n.right);
  }
  return nodes_[at].positive_fraction;
}

nlohmann::json DecisionTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : nodes_)
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.positive_fraction, n.samples});
  return {{"rule", config_.rule == SplitRule::best ? "best" : "random"},
          {"max_features", config_.max_features},
          {"max_depth", config_.max_depth},
          {"min_samples_leaf", config_.min_samples_leaf},
          {"nodes", std::move(nodes)}};
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
  TreeConfig c;
  c.rule = j.at("rule").get<std::string>() == "best" ? SplitRule::best : SplitRule::random;
  c.max_features = j.at("max_features").get<int>();
  c.max_depth = j.at("max_depth").get<int>();
  c.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  DecisionTree t(c);
  for (const auto& n : j.at("nodes")) {
    TreeNode node{n.at(0).get<std::int32_t>(), n.at(1).get<double>(), n.at(2).get<std::int32_t>(),
                  n.at(3).get<std::int32_t>(), n.at(4).get<double>(), n.at(5).get<std::int32_t>()};
    const auto count = static_cast<std::int32_t>(j.at("nodes").size());
    const auto self = static_cast<std::int32_t>(t.nodes_.size());
    if (node.feature >= 0 && (node.left <= self || node.right <= self || node.left >= count || node.right >= count))
      throw DecodeError("tree: child index out of range");
    t.nodes_.push_back(node);
  }
  if (t.nodes_.empty()) throw DecodeError("tree: no nodes");
  return t;
}

}  // namespace clonewatch::forest
