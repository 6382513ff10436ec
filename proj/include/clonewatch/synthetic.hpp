#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "clonewatch/model.hpp"

namespace clonewatch {

/// Knobs for the synthetic population. Clones and duplicates are added on
/// top of `population` base accounts.
struct SyntheticConfig {
  std::size_t population = 1000;
  double clone_rate = 0.05;
  double duplicate_rate = 0.0;
  std::size_t vocabulary_size = 3000;
  std::size_t min_posts = 5;
  std::size_t max_posts = 20;
  std::size_t communities = 20;
  double mean_friends = 20.0;
  /// Every clone/duplicate has username or screen-name Jaro-Winkler above this.
  double name_similarity_floor = 0.8;
  std::string snapshot = "2023-01-01";

  // Hard cases that keep the classification task from being separable by a
  // single feature.
  double clone_mimic_rate = 0.3;        ///< clones with bought, victim-like counts
  double duplicate_dormant_rate = 0.3;  ///< duplicates left dormant, clone-like counts
  double young_legit_rate = 0.1;        ///< fresh legitimate accounts with low counts
  double promo_legit_rate = 0.08;       ///< legitimate accounts posting promotional text

  void validate() const;
};

struct SyntheticData {
  Corpus corpus;
  std::vector<LabeledPair> truth;
};

/// Pure function of (config, seed).
SyntheticData generate_synthetic(const SyntheticConfig& config, std::uint64_t seed);

/// Applies 1 or 2 character edits (transposition, look-alike substitution,
/// insertion, deletion).
std::string perturb_name(const std::string& name, std::size_t edits, std::uint64_t seed);

}  // namespace clonewatch
