#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "clonewatch/model.hpp"
#include "clonewatch/textsim.hpp"

namespace clonewatch {

struct GraphConfig {
  double delta = 0.8;
  std::optional<std::size_t> max_pairs_per_account;
  /// Above this many accounts, candidates must also share the first
  /// character of the compared field.
  std::size_t blocking_threshold = 50'000;

  void validate() const;
};

enum class NameTrigger { username, screen_name, both };
enum class AuthStatus { null, successful, unsuccessful };

std::string_view to_string(NameTrigger t);
std::string_view to_string(AuthStatus s);
NameTrigger parse_name_trigger(std::string_view s);
AuthStatus parse_auth_status(std::string_view s);

/// The ten pair features: four similarities, the followers ratio, and five
/// absolute differences (followers, account age in days, tweets, favorites,
/// friends).
struct PairFeatureVector {
  static constexpr std::size_t size = 10;
  std::array<double, size> values{};

  double screen_name_similarity() const { return values[0]; }
  double location_similarity() const { return values[1]; }
  double username_similarity() const { return values[2]; }
  double description_similarity() const { return values[3]; }
  double followers_ratio() const { return values[4]; }
  double followers_difference() const { return values[5]; }
  double account_age_difference_days() const { return values[6]; }
  double tweets_difference() const { return values[7]; }
  double favorites_difference() const { return values[8]; }
  double friends_difference() const { return values[9]; }

  bool operator==(const PairFeatureVector&) const = default;
};

struct CandidatePair {
  AccountId older_id;
  AccountId newer_id;
  NameTrigger trigger = NameTrigger::username;
  std::optional<PairFeatureVector> features;
  std::optional<PairLabel> predicted;
  AuthStatus auth_status = AuthStatus::null;

  std::string pair_id() const { return older_id + "|" + newer_id; }
};

/// Orders two accounts older -> newer by registration, ties by id.
std::pair<const AccountProfile*, const AccountProfile*> order_by_age(const AccountProfile& a,
                                                                     const AccountProfile& b);

/// Edge iff username or screen-name Jaro-Winkler similarity is strictly
/// greater than delta. Output is sorted by (older_id, newer_id).
std::vector<CandidatePair> build_graph(const Corpus& corpus, const GraphConfig& config);

/// Reference O(n^2) construction without pruning or blocking.
std::vector<CandidatePair> build_graph_exhaustive(const Corpus& corpus, double delta);

/// Per-threshold edge count and recall against `truth` in one quadratic pass.
struct DeltaSweepRow {
  double delta = 0;
  std::size_t edges = 0;
  std::size_t recovered = 0;
  std::size_t truth = 0;
  double recall() const { return truth ? static_cast<double>(recovered) / static_cast<double>(truth) : 0.0; }
};
std::vector<DeltaSweepRow> sweep_delta(const Corpus& corpus, std::span<const double> deltas,
                                       const std::vector<LabeledPair>& truth);

/// TF-IDF model over the preprocessed descriptions of every account.
textsim::TfidfModel fit_description_tfidf(const Corpus& corpus);

PairFeatureVector extract_pair_features(const Corpus& corpus, const CandidatePair& pair,
                                        const textsim::TfidfModel& tfidf);

/// Pairs CSV: older_id,newer_id,trigger,f1..f10,predicted,auth_status. An
/// optional trailing `final` column carries the post-authentication verdict.
struct PairRecord {
  CandidatePair pair;
  std::optional<PairLabel> final_verdict;
};
void save_pairs_csv(const std::vector<PairRecord>& pairs, const std::filesystem::path& path,
                    bool with_final = false);
std::vector<PairRecord> load_pairs_csv(const std::filesystem::path& path);

}  // namespace clonewatch
