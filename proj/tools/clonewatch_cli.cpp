#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "clonewatch/errors.hpp"
#include "clonewatch/pipeline.hpp"

namespace {

using namespace clonewatch;
namespace fs = std::filesystem;

constexpr int kConfigError = 2;
constexpr int kStageFailure = 3;

void report_error(const std::string& code, const std::string& message, const std::string& stage = {}) {
  nlohmann::json j{{"error", code}, {"message", message}};
  if (!stage.empty()) j["stage"] = stage;
  std::cerr << j.dump() << '\n';
}

pipeline::PipelineConfig config_or_default(const std::string& path) {
  return path.empty() ? pipeline::PipelineConfig{} : pipeline::load_config(path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detects cloned social-media identities and authenticates flagged pairs."};
  app.require_subcommand(1);

  std::string config_path, output, pairs_path, scenario_path, backend;
  bool delta_sweep = false, no_cache = false;
  std::uint64_t seed = 0;
  std::vector<std::size_t> scales;

  auto* detect = app.add_subcommand("detect", "Run detection end to end");
  detect->add_option("--config", config_path, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  detect->add_flag("--delta-sweep", delta_sweep, "Also report edge count and recall for delta in 0.1..0.9");
  detect->add_flag("--no-cache", no_cache, "Recompute every stage");
  detect->add_option("--output", output, "Output directory (overrides the config)");

  auto* authenticate = app.add_subcommand("authenticate", "Authenticate predicted-cloned pairs");
  authenticate->add_option("--pairs", pairs_path, "pairs.csv from detect")->required()->check(CLI::ExistingFile);
  authenticate->add_option("--scenario", scenario_path, "Key possession per account (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  authenticate->add_option("--config", config_path, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  authenticate->add_option("--output", output, "Output directory (overrides the config)");

  auto* bench = app.add_subcommand("bench", "Time IBE and key-wrap operations across account scales");
  bench->add_option("--scales", scales, "Account scales, e.g. 1,100,1000")->delimiter(',');
  bench->add_option("--config", config_path, "Pipeline config (JSON)")->check(CLI::ExistingFile);
  bench->add_option("--backend", backend, "Pairing backend: test or ss512");
  bench->add_option("--output", output, "Report path (JSON)");

  auto* gen = app.add_subcommand("gen-data", "Write a synthetic corpus, ground truth and scenario");
  gen->add_option("--config", config_path, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  gen->add_option("--seed", seed, "Generator seed")->required();
  gen->add_option("--output", output, "Output directory (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    auto config = config_or_default(config_path);
    if (!output.empty() && !bench->parsed()) config.output_dir = output;

    if (detect->parsed()) {
      if (no_cache) config.cache = false;
      const auto metrics = pipeline::cmd_detect(config, {delta_sweep});
      std::cout << "pairs " << metrics["candidate_pairs"] << "  predicted cloned " << metrics["predicted_cloned"]
                << "  test P " << metrics["precision"] << " R " << metrics["recall"] << " F1 " << metrics["f1"]
                << "\nwrote " << config.output_dir.string() << '\n';
    } else if (authenticate->parsed()) {
      const auto summary = pipeline::cmd_authenticate(config, pairs_path, scenario_path);
      std::cout << "authenticated " << summary["authenticated"] << "  successful " << summary["successful"]
                << "  unsuccessful " << summary["unsuccessful"] << "  skipped " << summary["skipped"].size()
                << "  audit " << (summary["audit"]["passed"].get<bool>() ? "passed" : "FAILED") << '\n';
    } else if (bench->parsed()) {
      if (!backend.empty()) config.protocol.backend = backend;
      const auto report = pipeline::run_bench(scales, config);
      const auto j = report.to_json();
      const fs::path out = output.empty() ? config.output_dir / "bench.json" : fs::path(output);
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      std::ofstream(out) << j.dump(2) << '\n';
      for (const auto& r : report.rows) {
        std::cout << "scale " << r.scale;
        for (const auto& [op, s] : r.seconds) std::cout << "  " << op << ' ' << s;
        std::cout << "  keys " << r.private_keys << '\n';
      }
      for (const auto& [op, f] : report.fits) std::cout << op << " R2 " << f.r_squared << '\n';
    } else if (gen->parsed()) {
      config.seed = seed;
      pipeline::cmd_gen_data(config, config.output_dir);
      std::cout << "wrote " << config.output_dir.string() << '\n';
    }
    return 0;
  } catch (const ConfigError& e) {
    report_error("config_error", e.what());
    return kConfigError;
  } catch (const pipeline::StageError& e) {
    report_error(e.code(), e.what(), e.stage());
    return kStageFailure;
  } catch (const std::exception& e) {
    report_error("stage_failed", e.what());
    return kStageFailure;
  }
}
