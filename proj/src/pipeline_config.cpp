#include <fstream>
#include <set>

#include "clonewatch/errors.hpp"
#include "clonewatch/pipeline.hpp"

namespace clonewatch::pipeline {

using nlohmann::json;

PipelineConfig::PipelineConfig() {
  synthetic.population = 2000;
  synthetic.duplicate_rate = 0.02;
}

void PipelineConfig::validate() const {
  try {
    if (corpus && !labels) throw ConfigError("a corpus needs a labels file");
    if (!corpus) synthetic.validate();
    graph.validate();
    node2vec.validate();
    weak.validate();
    weak.cascade.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (post.dimension < 1) throw ConfigError("post dimension must be positive");
  for (double w : weights)
    if (!(w >= 0) || !std::isfinite(w)) throw ConfigError("wgcca weights must be finite and non-negative");
  if (weights[0] + weights[1] + weights[2] + weights[3] <= 0) throw ConfigError("wgcca weights are all zero");
  if (embedding_dim < 1) throw ConfigError("embedding_dim must be positive");
  if (ridge && !(*ridge >= 0)) throw ConfigError("ridge must be non-negative");
  if (!(clean_fraction > 0) || !(unlabeled_fraction >= 0) || !(clean_fraction + unlabeled_fraction < 1))
    throw ConfigError("split fractions need clean > 0, unlabeled >= 0 and clean + unlabeled < 1");
  if (protocol.backend != "test" && protocol.backend != "ss512")
    throw ConfigError("unknown protocol backend '" + protocol.backend + "'");
  if (protocol.message_bits < 128 || protocol.message_bits % 8) throw ConfigError("message_bits must be a multiple of 8, >= 128");
  if (protocol.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
  if (protocol.backoff_ms < 0) throw ConfigError("backoff_ms must be >= 0");
}

namespace {

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json path_json(const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); }

/// Reads declared keys only; anything else is a typo worth failing on.
class Reader {
 public:
  Reader(const json& j, std::string where, const fs::path& base) : j_(j), where_(std::move(where)), base_(base) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be an object");
  }
  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError("unknown key '" + where_ + key + "'");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("bad value for '" + where_ + key + "': " + e.what());
    }
  }
  template <class T>
  void get(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    if (it->is_null()) {
      out.reset();
      return;
    }
    T value{};
    get(key, value);
    out = value;
  }
  void path(const char* key, std::optional<fs::path>& out) {
    std::optional<std::string> s;
    if (out) s = out->string();
    get(key, s);
    if (!s) {
      out.reset();
      return;
    }
    fs::path p(*s);
    out = p.is_relative() && !base_.empty() ? base_ / p : p;
  }
  Reader child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    static const json empty = json::object();
    return Reader(it == j_.end() ? empty : *it, where_ + key + ".", base_);
  }

 private:
  const json& j_;
  std::string where_;
  fs::path base_;
  std::set<std::string> seen_;
};

}  // namespace

json to_json(const PipelineConfig& c) {
  const auto& s = c.synthetic;
  const auto& n = c.node2vec;
  const auto& cc = c.weak.cascade;
  return {
      {"seed", c.seed},
      {"data",
       {{"corpus", path_json(c.corpus)},
        {"labels", path_json(c.labels)},
        {"synthetic",
         {{"population", s.population},
          {"clone_rate", s.clone_rate},
          {"duplicate_rate", s.duplicate_rate},
          {"vocabulary_size", s.vocabulary_size},
          {"min_posts", s.min_posts},
          {"max_posts", s.max_posts},
          {"communities", s.communities},
          {"mean_friends", s.mean_friends},
          {"name_similarity_floor", s.name_similarity_floor},
          {"snapshot", s.snapshot},
          {"clone_mimic_rate", s.clone_mimic_rate},
          {"duplicate_dormant_rate", s.duplicate_dormant_rate},
          {"young_legit_rate", s.young_legit_rate},
          {"promo_legit_rate", s.promo_legit_rate}}}}},
      {"graph",
       {{"delta", c.graph.delta},
        {"max_pairs_per_account", optional_json(c.graph.max_pairs_per_account)},
        {"blocking_threshold", c.graph.blocking_threshold}}},
      {"views",
       {{"post_dimension", c.post.dimension},
        {"post_embeddings", path_json(c.post_embeddings)},
        {"node2vec",
         {{"dimensions", n.dimensions},
          {"p", n.p_return},
          {"q", n.q_inout},
          {"walk_length", n.walk_length},
          {"walks_per_node", n.walks_per_node},
          {"window", n.window},
          {"negatives", n.negatives},
          {"epochs", n.epochs},
          {"learning_rate", n.learning_rate}}}}},
      {"wgcca",
       {{"weights", c.weights},
        {"embedding_dim", c.embedding_dim},
        {"ridge", optional_json(c.ridge)},
        {"center", c.center}}},
      {"split", {{"clean", c.clean_fraction}, {"unlabeled", c.unlabeled_fraction}}},
      {"weak",
       {{"fraction", c.weak.fraction},
        {"include_clean", c.weak.include_clean},
        {"validation_fraction", c.weak.validation_fraction}}},
      {"cascade",
       {{"variant", forest::to_string(cc.variant)},
        {"folds", cc.folds},
        {"max_layers", cc.max_layers},
        {"min_improvement", cc.min_improvement},
        {"patience", cc.patience},
        {"trees", cc.forest.trees},
        {"max_features", cc.forest.max_features},
        {"max_depth", cc.forest.max_depth},
        {"min_samples_leaf", cc.forest.min_samples_leaf},
        {"l2", cc.logistic.l2},
        {"max_epochs", cc.logistic.max_epochs},
        {"tolerance", cc.logistic.tolerance}}},
      {"protocol",
       {{"backend", c.protocol.backend},
        {"security", optional_json(c.protocol.security)},
        {"message_bits", c.protocol.message_bits},
        {"max_attempts", c.protocol.max_attempts},
        {"backoff_ms", c.protocol.backoff_ms}}},
      {"output",
       {{"dir", c.output_dir.string()}, {"cache_dir", path_json(c.cache_dir)}, {"cache", c.cache}}},
  };
}

PipelineConfig config_from_json(const json& j, const fs::path& base) {
  PipelineConfig c;
  {
    Reader r(j, "", base);
    r.get("seed", c.seed);
    {
      auto d = r.child("data");
      d.path("corpus", c.corpus);
      d.path("labels", c.labels);
      auto s = d.child("synthetic");
      auto& sc = c.synthetic;
      s.get("population", sc.population);
      s.get("clone_rate", sc.clone_rate);
      s.get("duplicate_rate", sc.duplicate_rate);
      s.get("vocabulary_size", sc.vocabulary_size);
      s.get("min_posts", sc.min_posts);
      s.get("max_posts", sc.max_posts);
      s.get("communities", sc.communities);
      s.get("mean_friends", sc.mean_friends);
      s.get("name_similarity_floor", sc.name_similarity_floor);
      s.get("snapshot", sc.snapshot);
      s.get("clone_mimic_rate", sc.clone_mimic_rate);
      s.get("duplicate_dormant_rate", sc.duplicate_dormant_rate);
      s.get("young_legit_rate", sc.young_legit_rate);
      s.get("promo_legit_rate", sc.promo_legit_rate);
    }
    {
      auto g = r.child("graph");
      g.get("delta", c.graph.delta);
      g.get("max_pairs_per_account", c.graph.max_pairs_per_account);
      g.get("blocking_threshold", c.graph.blocking_threshold);
    }
    {
      auto v = r.child("views");
      v.get("post_dimension", c.post.dimension);
      v.path("post_embeddings", c.post_embeddings);
      auto n = v.child("node2vec");
      n.get("dimensions", c.node2vec.dimensions);
      n.get("p", c.node2vec.p_return);
      n.get("q", c.node2vec.q_inout);
      n.get("walk_length", c.node2vec.walk_length);
      n.get("walks_per_node", c.node2vec.walks_per_node);
      n.get("window", c.node2vec.window);
      n.get("negatives", c.node2vec.negatives);
      n.get("epochs", c.node2vec.epochs);
      n.get("learning_rate", c.node2vec.learning_rate);
    }
    {
      auto w = r.child("wgcca");
      w.get("weights", c.weights);
      w.get("embedding_dim", c.embedding_dim);
      w.get("ridge", c.ridge);
      w.get("center", c.center);
    }
    {
      auto s = r.child("split");
      s.get("clean", c.clean_fraction);
      s.get("unlabeled", c.unlabeled_fraction);
    }
    {
      auto w = r.child("weak");
      w.get("fraction", c.weak.fraction);
      w.get("include_clean", c.weak.include_clean);
      w.get("validation_fraction", c.weak.validation_fraction);
    }
    {
      auto k = r.child("cascade");
      auto& cc = c.weak.cascade;
      std::string variant(forest::to_string(cc.variant));
      k.get("variant", variant);
      try {
        cc.variant = forest::parse_cascade_variant(variant);
      } catch (const Error& e) {
        throw ConfigError(e.what());
      }
      k.get("folds", cc.folds);
      k.get("max_layers", cc.max_layers);
      k.get("min_improvement", cc.min_improvement);
      k.get("patience", cc.patience);
      k.get("trees", cc.forest.trees);
      k.get("max_features", cc.forest.max_features);
      k.get("max_depth", cc.forest.max_depth);
      k.get("min_samples_leaf", cc.forest.min_samples_leaf);
      k.get("l2", cc.logistic.l2);
      k.get("max_epochs", cc.logistic.max_epochs);
      k.get("tolerance", cc.logistic.tolerance);
    }
    {
      auto p = r.child("protocol");
      p.get("backend", c.protocol.backend);
      p.get("security", c.protocol.security);
      p.get("message_bits", c.protocol.message_bits);
      p.get("max_attempts", c.protocol.max_attempts);
      p.get("backoff_ms", c.protocol.backoff_ms);
    }
    {
      auto o = r.child("output");
      std::optional<fs::path> dir = c.output_dir;
      o.path("dir", dir);
      if (!dir) throw ConfigError("output.dir cannot be null");
      c.output_dir = *dir;
      o.path("cache_dir", c.cache_dir);
      o.get("cache", c.cache);
    }
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

}  // namespace clonewatch::pipeline
