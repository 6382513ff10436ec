#include "clonewatch/views.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "clonewatch/errors.hpp"
#include "clonewatch/textsim.hpp"

namespace clonewatch {

std::string_view to_string(ViewName v) {
  switch (v) {
    case ViewName::post: return "post";
    case ViewName::friend_network: return "friend_network";
    case ViewName::follower_network: return "follower_network";
    case ViewName::profile: return "profile";
  }
  return "post";
}

void ViewMatrix::validate() const {
  if (static_cast<std::size_t>(data.rows()) != row_ids.size())
    throw ValidationError(std::string(to_string(view_name)) + " view: row count mismatch");
  if (!data.allFinite())
    throw ValidationError(std::string(to_string(view_name)) + " view contains NaN or Inf");
}

namespace {

std::vector<AccountId> corpus_row_ids(const Corpus& corpus) {
  std::vector<AccountId> ids;
  ids.reserve(corpus.size());
  for (const auto* a : corpus.ordered()) ids.push_back(a->account_id);
  return ids;
}

}  // namespace

HashedTfidfEmbedder::HashedTfidfEmbedder(const Corpus& corpus, Eigen::Index dimension)
    : dimension_(dimension) {
  if (dimension <= 0) throw ConfigError("post embedding dimension must be positive");
  std::vector<textsim::Terms> docs;
  for (const auto* a : corpus.ordered())
    for (const auto& post : a->posts) docs.push_back(textsim::preprocess(post));
  const auto model = textsim::TfidfModel::fit(docs);
  vocabulary_.resize(model.vocabulary_size());
  for (const auto& [term, idx] : model.vocabulary()) vocabulary_[idx] = term;
  idf_ = model.idf();
  unseen_idf_ = std::log(1.0 + static_cast<double>(model.document_count())) + 1.0;
}

Eigen::VectorXd HashedTfidfEmbedder::embed(std::string_view post) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dimension_);
  auto terms = textsim::preprocess(post);
  std::sort(terms.begin(), terms.end());
  for (std::size_t i = 0; i < terms.size();) {
    std::size_t j = i;
    while (j < terms.size() && terms[j] == terms[i]) ++j;
    const double tf = static_cast<double>(j - i);
    auto it = std::lower_bound(vocabulary_.begin(), vocabulary_.end(), terms[i]);
    const double idf = (it != vocabulary_.end() && *it == terms[i])
                           ? idf_[static_cast<std::size_t>(it - vocabulary_.begin())]
                           : unseen_idf_;
    const std::uint64_t h = textsim::fnv1a(terms[i]);
    const auto bucket = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dimension_));
    v[bucket] += ((h >> 63) ? -1.0 : 1.0) * tf * idf;
    i = j;
  }
  const double norm = v.norm();
  if (norm > 0) v /= norm;
  return v;
}

std::vector<std::pair<AccountId, Eigen::VectorXd>> load_external_embeddings(
    const std::filesystem::path& path, Eigen::Index expected_dimension) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open embedding file " + path.string());
  std::vector<std::pair<AccountId, Eigen::VectorXd>> rows;
  std::string line;
  std::size_t lineno = 0;
  const bool jsonl = path.extension() == ".jsonl" || path.extension() == ".json";
  Eigen::Index declared = -1;
  bool has_post_index = false;

  auto check_width = [&](const AccountId& id, Eigen::Index width) {
    if (width != expected_dimension)
      throw ParseError("embedding for account '" + id + "' has width " + std::to_string(width) +
                           ", expected " + std::to_string(expected_dimension),
                       lineno);
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (jsonl) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what(), lineno);
      }
      if (declared < 0) {
        if (!j.contains("dimension")) throw ParseError("missing {\"dimension\": d} header", lineno);
        declared = j.at("dimension").get<Eigen::Index>();
        continue;
      }
      const auto id = j.at("account_id").get<std::string>();
      const auto vec = j.at("vector").get<std::vector<double>>();
      check_width(id, declared);
      check_width(id, static_cast<Eigen::Index>(vec.size()));
      rows.emplace_back(id, Eigen::Map<const Eigen::VectorXd>(vec.data(), static_cast<Eigen::Index>(vec.size())));
      continue;
    }
    auto fields = split_csv_line(line);
    if (declared < 0) {
      if (fields.empty() || fields[0] != "account_id") throw ParseError("missing CSV header row", lineno);
      has_post_index = fields.size() > 1 && fields[1] == "post_index";
      declared = static_cast<Eigen::Index>(fields.size()) - (has_post_index ? 2 : 1);
      continue;
    }
    const auto& id = fields.at(0);
    const std::size_t offset = has_post_index ? 2 : 1;
    check_width(id, declared);
    check_width(id, static_cast<Eigen::Index>(fields.size() - offset));
    Eigen::VectorXd v(declared);
    try {
      for (Eigen::Index k = 0; k < declared; ++k) v[k] = std::stod(fields[offset + static_cast<std::size_t>(k)]);
    } catch (const std::exception&) {
      throw ParseError("non-numeric embedding value for account '" + id + "'", lineno);
    }
    rows.emplace_back(id, std::move(v));
  }
  return rows;
}

ViewMatrix build_post_view(const Corpus& corpus, const PostEmbedderConfig& config,
                           const std::optional<std::filesystem::path>& external) {
  ViewMatrix view;
  view.view_name = ViewName::post;
  view.row_ids = corpus_row_ids(corpus);
  view.data = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(corpus.size()), config.dimension);

  if (external) {
    std::vector<double> counts(corpus.size(), 0.0);
    for (auto& [id, vec] : load_external_embeddings(*external, config.dimension)) {
      if (!corpus.contains(id)) continue;
      const auto r = corpus.index_of(id);
      view.data.row(static_cast<Eigen::Index>(r)) += vec.transpose();
      counts[r] += 1.0;
    }
    for (std::size_t r = 0; r < counts.size(); ++r)
      if (counts[r] > 0) view.data.row(static_cast<Eigen::Index>(r)) /= counts[r];
  } else {
    const HashedTfidfEmbedder embedder(corpus, config.dimension);
    for (std::size_t r = 0; r < corpus.size(); ++r) {
      const auto& posts = corpus.ordered()[r]->posts;
      if (posts.empty()) continue;
      Eigen::VectorXd sum = Eigen::VectorXd::Zero(config.dimension);
      for (const auto& p : posts) sum += embedder.embed(p);
      view.data.row(static_cast<Eigen::Index>(r)) = (sum / static_cast<double>(posts.size())).transpose();
    }
  }
  view.validate();
  return view;
}

ViewMatrix build_profile_view(const Corpus& corpus) {
  ViewMatrix view;
  view.view_name = ViewName::profile;
  view.row_ids = corpus_row_ids(corpus);
  const auto n = static_cast<Eigen::Index>(corpus.size());
  view.data.resize(n, kProfileColumns);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& a = *corpus.ordered()[static_cast<std::size_t>(r)];
    view.data.row(r) << static_cast<double>(a.follower_count), static_cast<double>(a.favorite_count),
        static_cast<double>(a.tweet_count), static_cast<double>(a.friend_count),
        static_cast<double>(a.list_count), static_cast<double>(corpus.account_age_days(a)),
        a.has_custom_background ? 1.0 : 0.0, static_cast<double>(a.screen_name_length()),
        a.has_profile_image ? 1.0 : 0.0, static_cast<double>(a.description_length()),
        a.has_description() ? 1.0 : 0.0, a.has_url ? 1.0 : 0.0;
  }
  static constexpr Eigen::Index scaled[] = {0, 1, 2, 3, 4, 5, 7, 9};
  if (n > 0) {
    for (auto c : scaled) {
      const double lo = view.data.col(c).minCoeff();
      const double hi = view.data.col(c).maxCoeff();
      if (hi > lo)
        view.data.col(c) = (view.data.col(c).array() - lo) / (hi - lo);
      else
        view.data.col(c).setZero();
    }
  }
  view.validate();
  return view;
}

}  // namespace clonewatch
