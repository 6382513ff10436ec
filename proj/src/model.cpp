#include "clonewatch/model.hpp"

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "clonewatch/errors.hpp"

namespace clonewatch {

using nlohmann::json;

Day parse_iso_date(std::string_view text) {
  int y = 0;
  unsigned m = 0, d = 0;
  if (text.size() < 10 || text[4] != '-' || text[7] != '-')
    throw ParseError("expected ISO-8601 date, got '" + std::string(text) + "'");
  try {
    y = std::stoi(std::string(text.substr(0, 4)));
    m = static_cast<unsigned>(std::stoi(std::string(text.substr(5, 2))));
    d = static_cast<unsigned>(std::stoi(std::string(text.substr(8, 2))));
  } catch (const std::exception&) {
    throw ParseError("expected ISO-8601 date, got '" + std::string(text) + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) throw ParseError("invalid calendar date '" + std::string(text) + "'");
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

std::string format_iso_date(Day day) {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{day}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Corpus::Corpus(std::vector<AccountProfile> accounts, std::optional<Day> snapshot) {
  Day latest = 0;
  bool any = false;
  for (auto& a : accounts) {
    if (a.account_id.empty()) throw ValidationError("account with empty id");
    if (!any || a.registered_at > latest) latest = a.registered_at;
    any = true;
    const auto id = a.account_id;
    if (!accounts_.emplace(id, std::move(a)).second)
      throw ValidationError("duplicate account id '" + id + "'");
  }
  snapshot_ = snapshot.value_or(latest);
  for (auto& [id, a] : accounts_) {
    if (a.registered_at > snapshot_)
      throw ValidationError("account '" + id + "' registered after the corpus snapshot");
    auto prune = [&](std::vector<AccountId>& edges) {
      std::vector<AccountId> kept;
      kept.reserve(edges.size());
      for (auto& e : edges) {
        if (accounts_.count(e))
          kept.push_back(std::move(e));
        else
          ++dangling_edges_;
      }
      edges = std::move(kept);
    };
    prune(a.friends);
    prune(a.followers);
  }
  ordered_.reserve(accounts_.size());
  for (const auto& [id, a] : accounts_) {
    index_.emplace(id, ordered_.size());
    ordered_.push_back(&a);
  }
}

const AccountProfile& Corpus::at(const AccountId& id) const {
  auto it = accounts_.find(id);
  if (it == accounts_.end()) throw LookupError("unknown account id '" + id + "'");
  return it->second;
}

std::size_t Corpus::index_of(const AccountId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw LookupError("unknown account id '" + id + "'");
  return it->second;
}

std::string_view to_string(PairLabel l) { return l == PairLabel::cloned ? "cloned" : "legitimate"; }
std::string_view to_string(LabelKind k) { return k == LabelKind::clean ? "clean" : "weak"; }

PairLabel parse_pair_label(std::string_view s) {
  if (s == "cloned") return PairLabel::cloned;
  if (s == "legitimate") return PairLabel::legitimate;
  throw ParseError("unknown pair label '" + std::string(s) + "'");
}

LabelKind parse_label_kind(std::string_view s) {
  if (s == "clean") return LabelKind::clean;
  if (s == "weak") return LabelKind::weak;
  throw ParseError("unknown label kind '" + std::string(s) + "'");
}

namespace {

AccountProfile account_from_json(const json& j) {
  AccountProfile a;
  a.account_id = j.at("id").get<std::string>();
  a.username = j.at("username").get<std::string>();
  a.screen_name = j.at("screen_name").get<std::string>();
  a.description = j.value("description", std::string{});
  a.location = j.value("location", std::string{});
  auto count = [&](const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
      throw ParseError(std::string("field '") + key + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
  };
  a.follower_count = count("followers");
  a.friend_count = count("friends");
  a.tweet_count = count("tweets");
  a.favorite_count = count("favorites");
  a.list_count = count("lists");
  a.registered_at = parse_iso_date(j.at("registered_at").get<std::string>());
  if (auto it = j.find("flags"); it != j.end()) {
    a.has_custom_background = it->value("background", false);
    a.has_profile_image = it->value("image", false);
    a.has_url = it->value("url", false);
  }
  a.posts = j.value("posts", std::vector<std::string>{});
  a.friends = j.value("friend_ids", std::vector<std::string>{});
  a.followers = j.value("follower_ids", std::vector<std::string>{});
  return a;
}

json account_to_json(const AccountProfile& a) {
  return json{{"id", a.account_id},
              {"username", a.username},
              {"screen_name", a.screen_name},
              {"description", a.description},
              {"location", a.location},
              {"followers", a.follower_count},
              {"friends", a.friend_count},
              {"tweets", a.tweet_count},
              {"favorites", a.favorite_count},
              {"lists", a.list_count},
              {"registered_at", format_iso_date(a.registered_at)},
              {"flags",
               {{"background", a.has_custom_background},
                {"image", a.has_profile_image},
                {"url", a.has_url}}},
              {"posts", a.posts},
              {"friend_ids", a.friends},
              {"follower_ids", a.followers}};
}

}  // namespace

Corpus parse_corpus_jsonl(std::istream& in) {
  std::vector<AccountProfile> accounts;
  std::optional<Day> snapshot;
  std::set<AccountId> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), lineno);
    }
    if (!j.is_object()) throw ParseError("record is not a JSON object", lineno);
    if (!j.contains("id") && j.contains("snapshot_at")) {
      try {
        snapshot = parse_iso_date(j.at("snapshot_at").get<std::string>());
      } catch (const Error& e) {
        throw ParseError(e.what(), lineno);
      }
      continue;
    }
    try {
      accounts.push_back(account_from_json(j));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad account record: ") + e.what(), lineno);
    }
    if (!seen.insert(accounts.back().account_id).second)
      throw ValidationError("duplicate account id '" + accounts.back().account_id + "' at line " +
                            std::to_string(lineno));
  }
  return Corpus(std::move(accounts), snapshot);
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus file " + path.string());
  return parse_corpus_jsonl(in);
}

void write_corpus_jsonl(const Corpus& corpus, std::ostream& out) {
  out << json{{"snapshot_at", format_iso_date(corpus.snapshot())}}.dump() << '\n';
  for (const auto* a : corpus.ordered()) out << account_to_json(*a).dump() << '\n';
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_corpus_jsonl(corpus, out);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

std::vector<LabeledPair> load_labeled_pairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open labeled pairs file " + path.string());
  std::vector<LabeledPair> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv_line(line);
    if (lineno == 1 && !f.empty() && f[0] == "older_id") continue;
    if (f.size() != 4) throw ParseError("expected 4 columns", lineno);
    try {
      pairs.push_back({f[0], f[1], parse_pair_label(f[2]), parse_label_kind(f[3])});
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return pairs;
}

void save_labeled_pairs(const std::vector<LabeledPair>& pairs, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "older_id,newer_id,label,label_kind\n";
  for (const auto& p : pairs)
    out << p.older_id << ',' << p.newer_id << ',' << to_string(p.label) << ','
        << to_string(p.label_kind) << '\n';
}

}  // namespace clonewatch
