#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clonewatch/errors.hpp"
#include "clonewatch/node2vec.hpp"
#include "clonewatch/pairgraph.hpp"
#include "clonewatch/protocol.hpp"
#include "clonewatch/synthetic.hpp"
#include "clonewatch/views.hpp"
#include "clonewatch/weaklabel.hpp"

namespace clonewatch::pipeline {

namespace fs = std::filesystem;

/// A stage aborted. `code()` is machine readable, e.g. "stage_failed:views".
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }
  std::string code() const { return "stage_failed:" + stage_; }

 private:
  std::string stage_;
};

struct ProtocolSettings {
  std::string backend = "ss512";  ///< or "test": small insecure group for property tests
  std::optional<int> security;  ///< group default when unset
  std::size_t message_bits = 256;
  int max_attempts = 3;
  int backoff_ms = 0;
};

struct PipelineConfig {
  std::uint64_t seed = 7;

  std::optional<fs::path> corpus;  ///< JSONL; synthetic data is generated when unset
  std::optional<fs::path> labels;  ///< ground-truth pairs CSV, required with `corpus`
  SyntheticConfig synthetic;

  GraphConfig graph;
  PostEmbedderConfig post;
  std::optional<fs::path> post_embeddings;
  node2vec::Config node2vec;

  std::array<double, 4> weights{0.25, 0.5, 0.5, 0.25};  ///< post, friend, follower, profile
  Eigen::Index embedding_dim = 100;
  std::optional<double> ridge;
  bool center = true;

  /// Candidate pairs are split clean / unlabeled / test by these shares.
  double clean_fraction = 0.2;
  double unlabeled_fraction = 0.4;
  weaklabel::WeakLabelConfig weak;

  ProtocolSettings protocol;

  fs::path output_dir = "clonewatch-out";
  std::optional<fs::path> cache_dir;  ///< output_dir/cache when unset
  bool cache = true;

  PipelineConfig();
  /// ConfigError on any invalid field.
  void validate() const;
  fs::path effective_cache_dir() const { return cache_dir.value_or(output_dir / "cache"); }
};

/// Every field, defaults included.
nlohmann::json to_json(const PipelineConfig& config);
/// Missing keys keep defaults; unknown keys are a ConfigError. Relative
/// paths resolve against `base`.
PipelineConfig config_from_json(const nlohmann::json& j, const fs::path& base = {});
PipelineConfig load_config(const fs::path& path);

// --------------------------------------------------------------- stages

struct Dataset {
  Corpus corpus;
  std::vector<LabeledPair> truth;
};

Dataset load_dataset(const PipelineConfig& config);

/// Key/value matrix cache under a directory; keys are content hashes.
class MatrixCache {
 public:
  explicit MatrixCache(std::optional<fs::path> dir) : dir_(std::move(dir)) {}
  std::optional<Eigen::MatrixXd> get(const std::string& key) const;
  void put(const std::string& key, const Eigen::MatrixXd& m) const;
  bool enabled() const { return dir_.has_value(); }

 private:
  std::optional<fs::path> dir_;
};

struct StageTiming {
  std::string stage;
  double seconds = 0;
  bool cache_hit = false;
};

/// Candidate pairs with features and per-account views, ready for training.
struct Prepared {
  Dataset data;
  std::vector<CandidatePair> pairs;
  Eigen::MatrixXd features;  ///< pairs x 10
  std::vector<ViewMatrix> views;
  std::vector<int> truth;    ///< 1 = cloned, per pair
  std::vector<Eigen::Index> clean_rows, unlabeled_rows, test_rows;
  std::string corpus_hash;
  std::vector<StageTiming> timings;
};

Prepared prepare(const PipelineConfig& config, const MatrixCache& cache);

/// Shared embedding G (accounts x k) for the given view weights.
Eigen::MatrixXd embed(const Prepared& prepared, const std::array<double, 4>& weights, const PipelineConfig& config,
                      const MatrixCache& cache, StageTiming* timing = nullptr);

/// Row i = [features_i | G_older | G_newer]; features omitted when `with_features` is false.
Eigen::MatrixXd pair_matrix(const Prepared& prepared, const Eigen::MatrixXd& G, bool with_features = true);

struct DetectionResult {
  weaklabel::WeakRun run;
  std::vector<int> predicted;  ///< per pair
  forest::BinaryMetrics test;
};

DetectionResult detect(const Prepared& prepared, const Eigen::MatrixXd& G, const PipelineConfig& config);

/// Test-split F1 of a supervised cascade trained on the clean split over
/// embedding columns only.
double view_ablation_f1(const Prepared& prepared, const Eigen::MatrixXd& G, const PipelineConfig& config);

// ------------------------------------------------------------ commands

struct DetectOptions {
  bool delta_sweep = false;
};

/// Writes pairs.csv, metrics.json, timings.json, manifest.json (and
/// delta_sweep.json) into the output directory. Returns metrics.json's content.
nlohmann::json cmd_detect(const PipelineConfig& config, const DetectOptions& options = {});

/// Writes the synthetic corpus, its ground truth, and a matching scenario.
void cmd_gen_data(const PipelineConfig& config, const fs::path& out_dir);

/// Key possession per account: holder account id -> identities whose keys it holds.
struct Scenario {
  std::map<AccountId, std::vector<AccountId>> holders;
};
Scenario load_scenario(const fs::path& path);
void save_scenario(const Scenario& scenario, const fs::path& path);
/// Duplicate owners hold both keys; every other newer account holds only its own.
Scenario scenario_from_truth(const std::vector<LabeledPair>& truth, const std::vector<CandidatePair>& pairs);

struct AuthenticationReport {
  std::vector<PairRecord> records;
  nlohmann::json summary;
};

/// Authenticates every predicted-cloned pair. final = cloned iff predicted
/// cloned and authentication unsuccessful; undetermined pairs have no final.
AuthenticationReport authenticate(std::vector<PairRecord> records, const Scenario& scenario,
                                  const Corpus& corpus, const PipelineConfig& config);

/// Writes pairs_final.csv and auth_report.json. Returns the summary.
nlohmann::json cmd_authenticate(const PipelineConfig& config, const fs::path& pairs_csv,
                                const fs::path& scenario_path);

// --------------------------------------------------------------- bench

struct BenchRow {
  std::size_t scale = 0;
  std::map<std::string, double> seconds;  ///< extract, encrypt, decrypt, wrap, unwrap
  std::size_t private_keys = 0;
  std::size_t public_identities = 0;
  std::size_t key_storage_bytes = 0;
};

struct LinearFit {
  double intercept = 0, slope = 0, r_squared = 0;
};
/// Least squares y = a + b x. r_squared is 1 for an exact fit, NaN with fewer
/// than two distinct x.
LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y);

struct BenchReport {
  std::string backend;
  std::vector<BenchRow> rows;
  std::map<std::string, LinearFit> fits;
  nlohmann::json to_json() const;
};

BenchReport run_bench(const std::vector<std::size_t>& scales, const PipelineConfig& config);

}  // namespace clonewatch::pipeline
