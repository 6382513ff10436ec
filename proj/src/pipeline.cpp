#include <openssl/opensslv.h>

#include <Eigen/Core>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include "clonewatch/errors.hpp"
#include "clonewatch/pipeline.hpp"
#include "clonewatch/wgcca.hpp"

namespace clonewatch::pipeline {

using nlohmann::json;

namespace {

constexpr std::string_view kVersion = "0.1.0";

enum SeedTag : std::uint64_t { kNode2vec = 2, kSplit = 3, kWeak = 4, kCascade = 5, kAblation = 8 };

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Runs `body` as the named stage: records its time and wraps failures.
template <class F>
auto run_stage(const std::string& name, std::vector<StageTiming>& timings, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  try {
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      timings.push_back({name, seconds_since(start), false});
    } else {
      auto result = body();
      timings.push_back({name, seconds_since(start), false});
      return result;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string hash_of(const std::string& text) { return sha256_hex(to_bytes(text)); }

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return hash_of(ss.str());
}

node2vec::Config node2vec_config(const PipelineConfig& config) {
  node2vec::Config n = config.node2vec;
  n.seed = derive_seed(config.seed, kNode2vec);
  return n;
}

weaklabel::WeakLabelConfig weak_config(const PipelineConfig& config) {
  weaklabel::WeakLabelConfig w = config.weak;
  w.seed = derive_seed(config.seed, kWeak);
  w.cascade.seed = derive_seed(config.seed, kCascade);
  return w;
}

ViewMatrix cached_view(ViewName name, const Corpus& corpus, const std::string& key, const MatrixCache& cache,
                       bool& cache_hit, const std::function<ViewMatrix()>& build) {
  if (auto hit = cache.get(key)) {
    cache_hit = true;
    ViewMatrix v;
    v.view_name = name;
    for (const auto* a : corpus.ordered()) v.row_ids.push_back(a->account_id);
    v.data = std::move(*hit);
    v.validate();
    return v;
  }
  ViewMatrix v = build();
  cache.put(key, v.data);
  return v;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
  if (!out) throw Error("cannot write " + path.string());
}

}  // namespace

// ---------------------------------------------------------------- cache

std::optional<Eigen::MatrixXd> MatrixCache::get(const std::string& key) const {
  if (!dir_) return std::nullopt;
  std::ifstream in(*dir_ / (key + ".mat"), std::ios::binary);
  if (!in) return std::nullopt;
  std::uint64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!in || rows > (1u << 28) || cols > (1u << 20)) return std::nullopt;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!in) return std::nullopt;
  return m;
}

void MatrixCache::put(const std::string& key, const Eigen::MatrixXd& m) const {
  if (!dir_) return;
  fs::create_directories(*dir_);
  const fs::path final_path = *dir_ / (key + ".mat");
  const fs::path tmp = final_path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    const std::uint64_t rows = static_cast<std::uint64_t>(m.rows()), cols = static_cast<std::uint64_t>(m.cols());
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!out) throw Error("cannot write cache " + tmp.string());
  }
  fs::rename(tmp, final_path);
}

// --------------------------------------------------------------- stages

Dataset load_dataset(const PipelineConfig& config) {
  if (!config.corpus) {
    auto data = generate_synthetic(config.synthetic, config.seed);
    return {std::move(data.corpus), std::move(data.truth)};
  }
  return {load_corpus(*config.corpus), load_labeled_pairs(*config.labels)};
}

Prepared prepare(const PipelineConfig& config, const MatrixCache& cache) {
  config.validate();
  Prepared p;
  p.data = run_stage("ingest", p.timings, [&] { return load_dataset(config); });
  {
    std::ostringstream ss;
    write_corpus_jsonl(p.data.corpus, ss);
    p.corpus_hash = hash_of(ss.str());
  }
  const Corpus& corpus = p.data.corpus;

  p.pairs = run_stage("graph", p.timings, [&] { return build_graph(corpus, config.graph); });
  if (p.pairs.empty()) throw StageError("graph", "no candidate pairs at delta " + std::to_string(config.graph.delta));

  run_stage("features", p.timings, [&] {
    const auto tfidf = fit_description_tfidf(corpus);
    std::set<std::pair<AccountId, AccountId>> cloned;
    for (const auto& t : p.data.truth)
      if (t.label == PairLabel::cloned) cloned.insert({t.older_id, t.newer_id});
    p.features.resize(static_cast<Eigen::Index>(p.pairs.size()), PairFeatureVector::size);
    p.truth.resize(p.pairs.size());
    for (std::size_t i = 0; i < p.pairs.size(); ++i) {
      auto& pair = p.pairs[i];
      pair.features = extract_pair_features(corpus, pair, tfidf);
      for (std::size_t j = 0; j < PairFeatureVector::size; ++j)
        p.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = pair.features->values[j];
      p.truth[i] = cloned.count({pair.older_id, pair.newer_id}) ? 1 : 0;
    }
  });

  bool views_cached = false;
  run_stage("views", p.timings, [&] {
    const std::string external = config.post_embeddings ? file_hash(*config.post_embeddings) : "none";
    const auto n2v = node2vec_config(config);
    const json n2v_json = to_json(config)["views"]["node2vec"];
    p.views.push_back(cached_view(
        ViewName::post, corpus, hash_of(p.corpus_hash + "|post|" + std::to_string(config.post.dimension) + "|" + external),
        cache, views_cached, [&] { return build_post_view(corpus, config.post, config.post_embeddings); }));
    for (ViewName which : {ViewName::friend_network, ViewName::follower_network}) {
      const std::string key = hash_of(p.corpus_hash + "|" + std::string(to_string(which)) + "|" + n2v_json.dump() +
                                      "|" + std::to_string(n2v.seed));
      p.views.push_back(cached_view(which, corpus, key, cache, views_cached,
                                    [&] { return node2vec::build_network_view(corpus, which, n2v); }));
    }
    p.views.push_back(build_profile_view(corpus));
  });
  p.timings.back().cache_hit = views_cached;

  Rng rng(derive_seed(config.seed, kSplit));
  std::vector<Eigen::Index> order(p.pairs.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  shuffle(order, rng);
  const auto n = static_cast<double>(order.size());
  const auto clean_end = static_cast<std::size_t>(n * config.clean_fraction);
  const auto unlabeled_end = static_cast<std::size_t>(n * (config.clean_fraction + config.unlabeled_fraction));
  p.clean_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(clean_end));
  p.unlabeled_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(clean_end),
                          order.begin() + static_cast<std::ptrdiff_t>(unlabeled_end));
  p.test_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(unlabeled_end), order.end());
  if (p.clean_rows.empty() || p.test_rows.empty()) throw StageError("split", "too few candidate pairs to split");
  return p;
}

Eigen::MatrixXd embed(const Prepared& prepared, const std::array<double, 4>& weights, const PipelineConfig& config,
                      const MatrixCache& cache, StageTiming* timing) {
  std::vector<StageTiming> local;
  auto G = run_stage("wgcca", local, [&] {
    std::string key = prepared.corpus_hash;
    for (const auto& v : prepared.views) key += "|" + hash_of(std::string(reinterpret_cast<const char*>(v.data.data()),
                                                                          static_cast<std::size_t>(v.data.size()) * sizeof(double)));
    key = hash_of(key + "|" + json(weights).dump() + "|" + std::to_string(config.embedding_dim) + "|" +
                  json(config.ridge ? json(*config.ridge) : json(nullptr)).dump() + "|" + (config.center ? "c" : "u"));
    if (auto hit = cache.get(key)) {
      if (timing) timing->cache_hit = true;
      return std::move(*hit);
    }
    wgcca::Problem<double> problem;
    for (const auto& v : prepared.views) problem.views.push_back(v.data);
    problem.weights.assign(weights.begin(), weights.end());
    problem.embedding_dim = config.embedding_dim;
    problem.ridge = config.ridge;
    problem.center = config.center;
    Eigen::MatrixXd g = wgcca::solve(problem).G;
    cache.put(key, g);
    return g;
  });
  if (timing) {
    timing->stage = "wgcca";
    timing->seconds = local.front().seconds;
  }
  return G;
}

Eigen::MatrixXd pair_matrix(const Prepared& prepared, const Eigen::MatrixXd& G, bool with_features) {
  const Eigen::Index f = with_features ? prepared.features.cols() : 0;
  Eigen::MatrixXd X(static_cast<Eigen::Index>(prepared.pairs.size()), f + 2 * G.cols());
  const Corpus& corpus = prepared.data.corpus;
  for (std::size_t i = 0; i < prepared.pairs.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const auto a = static_cast<Eigen::Index>(corpus.index_of(prepared.pairs[i].older_id));
    const auto b = static_cast<Eigen::Index>(corpus.index_of(prepared.pairs[i].newer_id));
    if (with_features) X.row(r).head(f) = prepared.features.row(r);
    X.row(r).segment(f, G.cols()) = G.row(a);
    X.row(r).tail(G.cols()) = G.row(b);
  }
  return X;
}

DetectionResult detect(const Prepared& prepared, const Eigen::MatrixXd& G, const PipelineConfig& config) {
  const forest::TabularDataset all{pair_matrix(prepared, G), prepared.truth};
  const auto clean = all.subset(prepared.clean_rows);
  auto unlabeled = all.subset(prepared.unlabeled_rows);
  unlabeled.y.reset();
  const auto test = all.subset(prepared.test_rows);

  DetectionResult result{weaklabel::train_weakly_supervised(clean, unlabeled, weak_config(config)), {}, {}};
  result.predicted = result.run.student.predict(all.X).labels;
  std::vector<int> test_predicted;
  for (auto r : prepared.test_rows) test_predicted.push_back(result.predicted[static_cast<std::size_t>(r)]);
  result.test = forest::evaluate(test.labels(), test_predicted);
  return result;
}

double view_ablation_f1(const Prepared& prepared, const Eigen::MatrixXd& G, const PipelineConfig& config) {
  const forest::TabularDataset all{pair_matrix(prepared, G, false), prepared.truth};
  const auto clean = all.subset(prepared.clean_rows);
  const auto test = all.subset(prepared.test_rows);
  const auto [train, valid] =
      forest::stratified_split(clean, config.weak.validation_fraction, derive_seed(config.seed, kAblation));
  forest::CascadeConfig cc = config.weak.cascade;
  cc.seed = derive_seed(config.seed, kAblation, 1);
  const auto model = forest::train_cascade(train, valid, cc);
  return forest::evaluate(test.labels(), model.predict(test.X).labels).f1;
}

// ------------------------------------------------------------- commands

json cmd_detect(const PipelineConfig& config, const DetectOptions& options) {
  config.validate();
  fs::create_directories(config.output_dir);
  const MatrixCache cache(config.cache ? std::optional(config.effective_cache_dir()) : std::nullopt);

  Prepared prepared = prepare(config, cache);
  StageTiming wgcca_timing;
  const Eigen::MatrixXd G = embed(prepared, config.weights, config, cache, &wgcca_timing);
  prepared.timings.push_back(wgcca_timing);
  const DetectionResult result = run_stage("cascade", prepared.timings, [&] { return detect(prepared, G, config); });

  run_stage("report", prepared.timings, [&] {
    std::vector<PairRecord> records;
    records.reserve(prepared.pairs.size());
    for (std::size_t i = 0; i < prepared.pairs.size(); ++i) {
      CandidatePair pair = prepared.pairs[i];
      pair.predicted = result.predicted[i] ? PairLabel::cloned : PairLabel::legitimate;
      records.push_back({std::move(pair), std::nullopt});
    }
    save_pairs_csv(records, config.output_dir / "pairs.csv");
  });

  std::size_t positives = 0, flagged = 0;
  for (int t : prepared.truth) positives += static_cast<std::size_t>(t);
  for (int v : result.predicted) flagged += static_cast<std::size_t>(v);
  const auto wc = weak_config(config);
  json metrics{
      {"accounts", prepared.data.corpus.size()},
      {"candidate_pairs", prepared.pairs.size()},
      {"cloned_pairs_in_graph", positives},
      {"predicted_cloned", flagged},
      {"split", {{"clean", prepared.clean_rows.size()}, {"unlabeled", prepared.unlabeled_rows.size()},
                 {"test", prepared.test_rows.size()}}},
      {"test", forest::to_json(result.test)},
      {"weak", weaklabel::report_json(result.run, wc)},
      {"student_layers", result.run.student.layers().size()},
      {"student_validation_history", result.run.student.validation_history()},
  };
  for (const char* stage : {"teacher", "student"}) {
    prepared.timings.push_back({std::string("cascade.") + stage, metrics["weak"][stage]["seconds"].get<double>(), false});
    metrics["weak"][stage].erase("seconds");
  }
  metrics["precision"] = result.test.precision;
  metrics["recall"] = result.test.recall;
  metrics["f1"] = result.test.f1;

  if (options.delta_sweep) {
    const std::vector<double> deltas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    const auto rows = run_stage("delta_sweep", prepared.timings,
                                [&] { return sweep_delta(prepared.data.corpus, deltas, prepared.data.truth); });
    json table = json::array();
    for (const auto& r : rows)
      table.push_back({{"delta", r.delta}, {"edges", r.edges}, {"recovered", r.recovered}, {"truth", r.truth},
                       {"recall", r.recall()}});
    write_json(config.output_dir / "delta_sweep.json", table);
    metrics["delta_sweep"] = table;
  }

  json timings = json::array();
  for (const auto& t : prepared.timings)
    timings.push_back({{"stage", t.stage}, {"seconds", t.seconds}, {"cache_hit", t.cache_hit}});
  json manifest{
      {"tool", "clonewatch"},
      {"version", kVersion},
      {"config", to_json(config)},
      {"derived_seeds",
       {{"node2vec", derive_seed(config.seed, kNode2vec)},
        {"split", derive_seed(config.seed, kSplit)},
        {"weak", wc.seed},
        {"cascade", wc.cascade.seed}}},
      {"corpus_sha256", prepared.corpus_hash},
      {"versions",
       {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"openssl", OPENSSL_VERSION_TEXT},
        {"compiler", __VERSION__}}},
  };
  write_json(config.output_dir / "metrics.json", metrics);
  write_json(config.output_dir / "timings.json", timings);
  write_json(config.output_dir / "manifest.json", manifest);
  return metrics;
}

void cmd_gen_data(const PipelineConfig& config, const fs::path& out_dir) {
  config.validate();
  fs::create_directories(out_dir);
  const auto data = generate_synthetic(config.synthetic, config.seed);
  save_corpus(data.corpus, out_dir / "corpus.jsonl");
  save_labeled_pairs(data.truth, out_dir / "truth.csv");
  save_scenario(scenario_from_truth(data.truth, build_graph(data.corpus, config.graph)), out_dir / "scenario.json");
}

}  // namespace clonewatch::pipeline
