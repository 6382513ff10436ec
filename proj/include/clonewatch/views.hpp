#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clonewatch/model.hpp"

namespace clonewatch {

enum class ViewName { post, friend_network, follower_network, profile };

std::string_view to_string(ViewName v);

/// One per-account view. Row r belongs to `row_ids[r]`, which matches the
/// corpus's ascending-id order for every view built here.
struct ViewMatrix {
  ViewName view_name = ViewName::post;
  std::vector<AccountId> row_ids;
  Eigen::MatrixXd data;

  Eigen::Index rows() const { return data.rows(); }
  Eigen::Index cols() const { return data.cols(); }
  /// Throws ValidationError on NaN/Inf or a row count mismatch.
  void validate() const;
};

struct PostEmbedderConfig {
  /// Width of each post vector; 385 by default (configurable; MiniLM emits 384).
  Eigen::Index dimension = 385;
};

/// Mean of per-post vectors. Without `external`, posts are embedded by the
/// hashed TF-IDF fallback: terms are hashed into `dimension` signed buckets
/// with tf-idf weights and each post vector is L2-normalised. Accounts with
/// no posts get a zero row.
ViewMatrix build_post_view(const Corpus& corpus, const PostEmbedderConfig& config,
                           const std::optional<std::filesystem::path>& external = std::nullopt);

/// Fallback post embedder; IDF is fitted over every post in the corpus.
class HashedTfidfEmbedder {
 public:
  HashedTfidfEmbedder(const Corpus& corpus, Eigen::Index dimension);
  Eigen::VectorXd embed(std::string_view post) const;
  Eigen::Index dimension() const { return dimension_; }

 private:
  Eigen::Index dimension_;
  std::vector<std::string> vocabulary_;
  std::vector<double> idf_;
  double unseen_idf_ = 1.0;
};

/// External embeddings, per account or per post, from CSV or JSONL.
///
/// CSV: header `account_id[,post_index],v0,...,v{d-1}`; the header's vector
/// columns declare the width. JSONL: first line `{"dimension": d}`, then
/// `{"account_id": ..., "post_index": i?, "vector": [...]}`.
/// Rows are mean-pooled per account. Throws ParseError naming the offending
/// account on a width mismatch.
std::vector<std::pair<AccountId, Eigen::VectorXd>> load_external_embeddings(
    const std::filesystem::path& path, Eigen::Index expected_dimension);

/// Twelve profile-attribute columns: follower, favorite, tweet, friend and
/// list counts, account age, background flag, screen-name length, image flag,
/// description length, has-description flag, URL flag. Count-like columns are
/// min-max scaled over the corpus (constant column -> 0); flags are 0/1.
ViewMatrix build_profile_view(const Corpus& corpus);

inline constexpr Eigen::Index kProfileColumns = 12;

}  // namespace clonewatch
