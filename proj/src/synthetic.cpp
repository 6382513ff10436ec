#include "clonewatch/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "clonewatch/errors.hpp"
#include "clonewatch/rng.hpp"
#include "clonewatch/textsim.hpp"

namespace clonewatch {

void SyntheticConfig::validate() const {
  if (population == 0) throw ConfigError("population must be positive");
  if (clone_rate < 0 || duplicate_rate < 0) throw ConfigError("rates must be nonnegative");
  if (clone_rate + duplicate_rate >= 1.0)
    throw ConfigError("clone_rate + duplicate_rate must be below 1");
  if (min_posts > max_posts) throw ConfigError("min_posts exceeds max_posts");
  if (vocabulary_size < 200) throw ConfigError("vocabulary_size must be at least 200");
  if (communities == 0) throw ConfigError("communities must be positive");
  if (!(name_similarity_floor >= 0.0 && name_similarity_floor < 1.0))
    throw ConfigError("name_similarity_floor must lie in [0, 1)");
}

namespace {

constexpr const char* kOnsets[] = {"b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p",
                                   "r", "s", "t", "v", "w", "z", "br", "ch", "dr", "gr", "kr",
                                   "pl", "sh", "st", "th", "tr", "qu", "sk"};
constexpr const char* kNuclei[] = {"a", "e", "i", "o", "u", "ai", "ea", "ou", "y", "ie", "oa"};
constexpr const char* kCodas[] = {"", "", "", "n", "r", "l", "s", "x", "m", "th", "ck", "nd", "rt"};

std::string syllable(Rng& rng) {
  std::string s = kOnsets[uniform_index(rng, std::size(kOnsets))];
  s += kNuclei[uniform_index(rng, std::size(kNuclei))];
  s += kCodas[uniform_index(rng, std::size(kCodas))];
  return s;
}

std::vector<std::string> unique_words(Rng& rng, std::size_t count, std::size_t min_syl,
                                      std::size_t max_syl, std::set<std::string>& taken) {
  std::vector<std::string> out;
  out.reserve(count);
  while (out.size() < count) {
    const auto syl = static_cast<std::size_t>(uniform_int(rng, static_cast<std::int64_t>(min_syl),
                                                          static_cast<std::int64_t>(max_syl)));
    std::string w;
    for (std::size_t i = 0; i < syl; ++i) w += syllable(rng);
    if (textsim::is_stopword(w) || !taken.insert(w).second) continue;
    out.push_back(std::move(w));
  }
  return out;
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::uint64_t lognormal_count(Rng& rng, double mu, double sigma) {
  return static_cast<std::uint64_t>(std::floor(std::exp(mu + sigma * standard_normal(rng))));
}

std::uint64_t jitter(Rng& rng, std::uint64_t v, double lo, double hi) {
  return static_cast<std::uint64_t>(std::llround(static_cast<double>(v) * uniform_real(rng, lo, hi)));
}

std::string perturb_once(const std::string& s, Rng& rng) {
  static constexpr std::pair<char, char> lookalikes[] = {
      {'l', '1'}, {'o', '0'}, {'i', 'l'}, {'e', '3'}, {'a', '4'}, {'s', '5'}, {'n', 'm'}, {'u', 'v'}};
  std::string out = s;
  if (out.size() < 2) return out + "x";
  const auto op = uniform_index(rng, 4);
  const auto pos = uniform_index(rng, out.size() - 1) + 1;  // keep the first character
  switch (op) {
    case 0:
      if (pos + 1 < out.size()) {
        std::swap(out[pos], out[pos + 1]);
        if (out != s) break;
      }
      [[fallthrough]];
    case 1: {
      const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(out[pos])));
      char replacement = static_cast<char>('a' + uniform_index(rng, 26));
      for (auto [from, to] : lookalikes)
        if (from == c) replacement = to;
      if (replacement == out[pos]) replacement = replacement == 'x' ? 'y' : 'x';
      out[pos] = replacement;
      break;
    }
    case 2:
      out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos),
                 static_cast<char>('a' + uniform_index(rng, 26)));
      break;
    default:
      out.erase(out.begin() + static_cast<std::ptrdiff_t>(pos));
      break;
  }
  return out;
}

std::string perturb(const std::string& name, std::size_t edits, Rng& rng) {
  std::string out = name;
  for (std::size_t i = 0; i < edits; ++i) out = perturb_once(out, rng);
  return out;
}

// Working representation before ids are assigned.
struct Draft {
  AccountProfile profile;
  std::size_t community = 0;
  std::vector<std::size_t> follows;
};

class Generator {
 public:
  Generator(const SyntheticConfig& cfg, std::uint64_t seed)
      : cfg_(cfg), rng_(derive_seed(seed, 0x5e17)), snapshot_(parse_iso_date(cfg.snapshot)) {
    std::set<std::string> taken;
    Rng words(derive_seed(seed, 1));
    first_names_ = unique_words(words, 40000, 2, 3, taken);
    last_names_ = unique_words(words, 40000, 3, 4, taken);
    cities_ = unique_words(words, 40, 2, 3, taken);
    for (auto& c : cities_) c = capitalize(c);
    spam_words_ = unique_words(words, 60, 1, 2, taken);
    general_words_ = unique_words(words, cfg.vocabulary_size / 4, 1, 2, taken);
    const std::size_t per_topic = std::max<std::size_t>(20, (cfg.vocabulary_size * 3 / 4) / cfg.communities);
    for (std::size_t c = 0; c < cfg.communities; ++c)
      topic_words_.push_back(unique_words(words, per_topic, 1, 3, taken));
  }

  SyntheticData run();

 private:
  std::string pick(const std::vector<std::string>& v) { return v[uniform_index(rng_, v.size())]; }

  std::string sentence(std::size_t community, std::size_t lo, std::size_t hi, double topic_share,
                       double spam_share) {
    const auto len = static_cast<std::size_t>(uniform_int(rng_, static_cast<std::int64_t>(lo),
                                                          static_cast<std::int64_t>(hi)));
    std::string s;
    for (std::size_t i = 0; i < len; ++i) {
      const double u = uniform01(rng_);
      std::string w = u < spam_share                 ? pick(spam_words_)
                      : u < spam_share + topic_share ? pick(topic_words_[community])
                                                     : pick(general_words_);
      if (!s.empty()) s += ' ';
      s += w;
      if (i == 0 && bernoulli(rng_, 0.3)) s += " the";
    }
    if (bernoulli(rng_, 0.5)) s += bernoulli(rng_, 0.5) ? "!" : ".";
    return s;
  }

  std::string handle_for(const std::string& first, const std::string& last) {
    std::string h;
    switch (uniform_index(rng_, 4)) {
      case 0: h = first + last; break;
      case 1: h = first.substr(0, 1) + "_" + last; break;
      case 2: h = last + "." + first; break;
      default: h = first + "_" + last.substr(0, std::min<std::size_t>(3, last.size())); break;
    }
    if (bernoulli(rng_, 0.5)) h += std::to_string(10 + uniform_index(rng_, 90));
    return h;
  }

  Draft base_account();
  Draft clone_of(const Draft& victim);
  Draft duplicate_of(const Draft& owner);
  bool names_close(const AccountProfile& a, const AccountProfile& b) const {
    return textsim::jaro_winkler(a.username, b.username) > cfg_.name_similarity_floor ||
           textsim::jaro_winkler(a.screen_name, b.screen_name) > cfg_.name_similarity_floor;
  }

  const SyntheticConfig& cfg_;
  Rng rng_;
  Day snapshot_;
  std::vector<std::string> first_names_, last_names_, cities_, spam_words_, general_words_;
  std::vector<std::vector<std::string>> topic_words_;
  std::vector<Draft> drafts_;
};

Draft Generator::base_account() {
  Draft d;
  auto& a = d.profile;
  d.community = uniform_index(rng_, cfg_.communities);
  const auto first = pick(first_names_);
  const auto last = pick(last_names_);
  a.username = capitalize(first) + " " + capitalize(last);
  a.screen_name = handle_for(first, last);
  if (bernoulli(rng_, 0.88)) a.description = sentence(d.community, 4, 10, 0.7, 0.0);
  if (bernoulli(rng_, 0.8)) a.location = pick(cities_);

  const bool young = bernoulli(rng_, cfg_.young_legit_rate);
  if (young) {
    a.registered_at = snapshot_ - uniform_int(rng_, 1, 400);
    a.follower_count = lognormal_count(rng_, 2.8, 1.2);
    a.friend_count = lognormal_count(rng_, 4.5, 1.0);
    a.tweet_count = lognormal_count(rng_, 3.5, 1.2);
    a.favorite_count = lognormal_count(rng_, 3.0, 1.2);
    a.list_count = lognormal_count(rng_, 0.0, 0.6);
  } else {
    a.registered_at = snapshot_ - uniform_int(rng_, 365, 4200);
    a.follower_count = lognormal_count(rng_, 5.5, 1.4);
    a.friend_count = lognormal_count(rng_, 5.0, 1.0);
    a.tweet_count = lognormal_count(rng_, 7.5, 1.3);
    a.favorite_count = lognormal_count(rng_, 6.5, 1.5);
    a.list_count = lognormal_count(rng_, 1.5, 1.0);
  }
  a.has_custom_background = bernoulli(rng_, 0.6);
  a.has_profile_image = bernoulli(rng_, young ? 0.7 : 0.92);
  a.has_url = bernoulli(rng_, 0.4);

  const bool promo = bernoulli(rng_, cfg_.promo_legit_rate);
  const auto posts = static_cast<std::size_t>(uniform_int(rng_, static_cast<std::int64_t>(cfg_.min_posts),
                                                          static_cast<std::int64_t>(cfg_.max_posts)));
  for (std::size_t i = 0; i < posts; ++i)
    a.posts.push_back(promo && bernoulli(rng_, 0.4) ? sentence(d.community, 6, 14, 0.2, 0.5)
                                                    : sentence(d.community, 6, 14, 0.6, 0.0));
  return d;
}

Draft Generator::clone_of(const Draft& victim) {
  const auto& v = victim.profile;
  Draft d;
  d.community = victim.community;
  auto& a = d.profile;
  for (int attempt = 0;; ++attempt) {
    a.username = perturb(v.username, 1 + uniform_index(rng_, 2), rng_);
    a.screen_name = perturb(v.screen_name, 1 + uniform_index(rng_, 2), rng_);
    if (names_close(a, v)) break;
    if (attempt > 50) {
      a.username = v.username;
      break;
    }
  }
  if (!v.description.empty() && bernoulli(rng_, 0.45)) {
    auto words = textsim::preprocess(v.description);
    a.description = v.description;
    if (!words.empty() && bernoulli(rng_, 0.5)) a.description += " " + pick(spam_words_);
  } else if (bernoulli(rng_, 0.8)) {
    a.description = sentence(d.community, 4, 10, 0.5, 0.2);
  }
  a.location = bernoulli(rng_, 0.75) ? v.location : (bernoulli(rng_, 0.5) ? pick(cities_) : "");

  const Day earliest = v.registered_at + 1;
  a.registered_at = std::max(earliest, snapshot_ - uniform_int(rng_, 1, 400));
  a.registered_at = std::min(a.registered_at, snapshot_);

  if (bernoulli(rng_, cfg_.clone_mimic_rate)) {
    a.follower_count = jitter(rng_, v.follower_count, 0.5, 1.5);
    a.friend_count = jitter(rng_, v.friend_count, 0.6, 1.6);
    a.tweet_count = jitter(rng_, v.tweet_count, 0.2, 1.0);
    a.favorite_count = jitter(rng_, v.favorite_count, 0.2, 1.0);
    a.list_count = jitter(rng_, v.list_count, 0.0, 1.0);
  } else {
    a.follower_count = lognormal_count(rng_, 2.5, 1.3);
    a.friend_count = lognormal_count(rng_, 6.0, 0.9);
    a.tweet_count = lognormal_count(rng_, 3.0, 1.3);
    a.favorite_count = lognormal_count(rng_, 2.5, 1.3);
    a.list_count = lognormal_count(rng_, -0.5, 0.6);
  }
  a.has_custom_background = bernoulli(rng_, 0.4);
  a.has_profile_image = bernoulli(rng_, 0.95);
  a.has_url = bernoulli(rng_, 0.15);

  const double copy_share = uniform_real(rng_, 0.1, 0.6);
  const double spam_share = uniform_real(rng_, 0.0, 0.5);
  const auto posts = static_cast<std::size_t>(uniform_int(rng_, static_cast<std::int64_t>(cfg_.min_posts),
                                                          static_cast<std::int64_t>(cfg_.max_posts)));
  for (std::size_t i = 0; i < posts; ++i) {
    const double u = uniform01(rng_);
    if (u < copy_share && !v.posts.empty())
      a.posts.push_back(pick(v.posts));
    else if (u < copy_share + spam_share)
      a.posts.push_back(sentence(d.community, 6, 14, 0.3, 0.5));
    else
      a.posts.push_back(sentence(d.community, 6, 14, 0.6, 0.0));
  }

  // Part of the victim's followees plus a sweep that is half in the victim's community.
  for (auto f : victim.follows)
    if (bernoulli(rng_, 0.4)) d.follows.push_back(f);
  const auto extra = 5 + uniform_index(rng_, 25);
  for (std::size_t i = 0; i < extra; ++i)
    d.follows.push_back(bernoulli(rng_, 0.5) && !victim.follows.empty() ? victim.follows[uniform_index(rng_, victim.follows.size())]
                                                                        : uniform_index(rng_, cfg_.population));
  return d;
}

Draft Generator::duplicate_of(const Draft& owner) {
  const auto& o = owner.profile;
  Draft d;
  d.community = owner.community;
  auto& a = d.profile;
  static constexpr const char* suffixes[] = {"2", "_", "_alt", "_2", "official", "x"};
  for (int attempt = 0;; ++attempt) {
    a.username = bernoulli(rng_, 0.5) ? o.username : perturb(o.username, 1, rng_);
    a.screen_name = bernoulli(rng_, 0.6) ? o.screen_name + suffixes[uniform_index(rng_, std::size(suffixes))]
                                         : perturb(o.screen_name, 1 + uniform_index(rng_, 2), rng_);
    if (names_close(a, o)) break;
    if (attempt > 50) {
      a.username = o.username;
      break;
    }
  }
  a.description = bernoulli(rng_, 0.5) ? o.description : sentence(d.community, 4, 10, 0.7, 0.0);
  a.location = bernoulli(rng_, 0.85) ? o.location : pick(cities_);
  a.registered_at = std::min(snapshot_, o.registered_at + uniform_int(rng_, 30, 2000));

  if (bernoulli(rng_, cfg_.duplicate_dormant_rate)) {
    a.follower_count = lognormal_count(rng_, 2.5, 1.3);
    a.friend_count = lognormal_count(rng_, 4.0, 1.0);
    a.tweet_count = lognormal_count(rng_, 2.5, 1.3);
    a.favorite_count = lognormal_count(rng_, 2.0, 1.3);
    a.list_count = 0;
  } else {
    a.follower_count = jitter(rng_, o.follower_count, 0.6, 1.4);
    a.friend_count = jitter(rng_, o.friend_count, 0.6, 1.4);
    a.tweet_count = jitter(rng_, o.tweet_count, 0.6, 1.4);
    a.favorite_count = jitter(rng_, o.favorite_count, 0.6, 1.4);
    a.list_count = jitter(rng_, o.list_count, 0.6, 1.4);
  }
  a.has_custom_background = bernoulli(rng_, 0.9) ? o.has_custom_background : !o.has_custom_background;
  a.has_profile_image = bernoulli(rng_, 0.9) ? o.has_profile_image : !o.has_profile_image;
  a.has_url = bernoulli(rng_, 0.9) ? o.has_url : !o.has_url;

  const auto posts = static_cast<std::size_t>(uniform_int(rng_, static_cast<std::int64_t>(cfg_.min_posts),
                                                          static_cast<std::int64_t>(cfg_.max_posts)));
  for (std::size_t i = 0; i < posts; ++i)
    a.posts.push_back(bernoulli(rng_, 0.2) && !o.posts.empty() ? pick(o.posts)
                                                               : sentence(d.community, 6, 14, 0.6, 0.0));
  for (auto f : owner.follows)
    if (bernoulli(rng_, 0.7)) d.follows.push_back(f);
  return d;
}

SyntheticData Generator::run() {
  const std::size_t n = cfg_.population;
  drafts_.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i) drafts_.push_back(base_account());

  // Community-biased follow graph over the base population.
  std::vector<std::vector<std::size_t>> by_community(cfg_.communities);
  for (std::size_t i = 0; i < n; ++i) by_community[drafts_[i].community].push_back(i);
  for (std::size_t i = 0; i < n; ++i) {
    const auto degree = 1 + static_cast<std::size_t>(std::floor(-std::log(1.0 - uniform01(rng_)) * cfg_.mean_friends));
    const auto& mates = by_community[drafts_[i].community];
    for (std::size_t k = 0; k < degree; ++k) {
      const std::size_t target = bernoulli(rng_, 0.8) ? mates[uniform_index(rng_, mates.size())]
                                                      : uniform_index(rng_, n);
      if (target != i) drafts_[i].follows.push_back(target);
    }
  }

  const auto clones = static_cast<std::size_t>(std::llround(cfg_.clone_rate * static_cast<double>(n)));
  const auto dups = static_cast<std::size_t>(std::llround(cfg_.duplicate_rate * static_cast<double>(n)));
  const auto chosen = sample_without_replacement(rng_, n, clones + dups);

  struct Link {
    std::size_t older, newer;
    PairLabel label;
  };
  std::vector<Link> links;
  std::vector<std::size_t> clone_indices;
  for (std::size_t c = 0; c < clones; ++c) {
    const auto victim = chosen[c];
    Draft d = clone_of(drafts_[victim]);
    links.push_back({victim, drafts_.size(), PairLabel::cloned});
    clone_indices.push_back(drafts_.size());
    drafts_.push_back(std::move(d));
  }
  for (std::size_t k = 0; k < dups; ++k) {
    const auto owner = chosen[clones + k];
    Draft d = duplicate_of(drafts_[owner]);
    // Half of the owner's audience follows the second account too.
    const auto idx = drafts_.size();
    for (std::size_t j = 0; j < n; ++j)
      for (auto f : drafts_[j].follows)
        if (f == owner && bernoulli(rng_, 0.5)) {
          drafts_[j].follows.push_back(idx);
          break;
        }
    links.push_back({owner, idx, PairLabel::legitimate});
    drafts_.push_back(std::move(d));
  }
  // Some clones boost each other through a sparse follow ring.
  for (auto c : clone_indices)
    if (clone_indices.size() > 1 && bernoulli(rng_, 0.5)) {
      const auto other = clone_indices[uniform_index(rng_, clone_indices.size())];
      if (other != c) drafts_[c].follows.push_back(other);
    }

  // Assign ids in a shuffled order so ids carry no hint of account type.
  const std::size_t total = drafts_.size();
  std::vector<std::size_t> perm(total);
  for (std::size_t i = 0; i < total; ++i) perm[i] = i;
  shuffle(perm, rng_);
  std::vector<AccountId> ids(total);
  char buf[32];
  for (std::size_t slot = 0; slot < total; ++slot) {
    std::snprintf(buf, sizeof buf, "u%06zu", slot);
    ids[perm[slot]] = buf;
  }

  // Crawled friend and follower lists are independent incomplete samples.
  std::vector<std::vector<std::size_t>> followers(total);
  for (std::size_t i = 0; i < total; ++i) {
    auto& f = drafts_[i].follows;
    std::sort(f.begin(), f.end());
    f.erase(std::unique(f.begin(), f.end()), f.end());
    std::erase(f, i);
    for (auto t : f) followers[t].push_back(i);
  }
  std::vector<AccountProfile> accounts;
  accounts.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    auto p = std::move(drafts_[i].profile);
    p.account_id = ids[i];
    for (auto t : drafts_[i].follows)
      if (bernoulli(rng_, 0.8)) p.friends.push_back(ids[t]);
    for (auto s : followers[i])
      if (bernoulli(rng_, 0.8)) p.followers.push_back(ids[s]);
    accounts.push_back(std::move(p));
  }

  SyntheticData out;
  for (const auto& l : links)
    out.truth.push_back({ids[l.older], ids[l.newer], l.label, LabelKind::clean});
  std::sort(out.truth.begin(), out.truth.end(), [](const LabeledPair& a, const LabeledPair& b) {
    return std::tie(a.older_id, a.newer_id) < std::tie(b.older_id, b.newer_id);
  });
  out.corpus = Corpus(std::move(accounts), snapshot_);
  return out;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticConfig& config, std::uint64_t seed) {
  config.validate();
  return Generator(config, seed).run();
}

std::string perturb_name(const std::string& name, std::size_t edits, std::uint64_t seed) {
  Rng rng(seed);
  return perturb(name, edits, rng);
}

}  // namespace clonewatch
