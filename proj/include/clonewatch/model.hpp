#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace clonewatch {

using AccountId = std::string;

/// Calendar day number, days since 1970-01-01.
using Day = std::int64_t;

/// Parses "YYYY-MM-DD" or a full ISO-8601 timestamp (date part is kept).
Day parse_iso_date(std::string_view text);
std::string format_iso_date(Day day);

/// One provider's public, non-privacy-sensitive profile snapshot.
struct AccountProfile {
  AccountId account_id;
  std::string username;
  std::string screen_name;
  std::string description;
  std::string location;
  std::uint64_t follower_count = 0;
  std::uint64_t friend_count = 0;
  std::uint64_t tweet_count = 0;
  std::uint64_t favorite_count = 0;
  std::uint64_t list_count = 0;
  Day registered_at = 0;
  bool has_custom_background = false;
  bool has_profile_image = false;
  bool has_url = false;
  std::vector<std::string> posts;
  std::vector<AccountId> friends;
  std::vector<AccountId> followers;

  std::size_t screen_name_length() const { return screen_name.size(); }
  std::size_t description_length() const { return description.size(); }
  bool has_description() const { return !description.empty(); }

  bool operator==(const AccountProfile&) const = default;
};

/// Immutable set of accounts keyed by id. Edges to ids outside the corpus
/// are dropped at construction and counted.
class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<AccountProfile> accounts, std::optional<Day> snapshot = std::nullopt);

  std::size_t size() const { return accounts_.size(); }
  bool empty() const { return accounts_.empty(); }
  bool contains(const AccountId& id) const { return accounts_.count(id) != 0; }

  /// Throws LookupError for unknown ids.
  const AccountProfile& at(const AccountId& id) const;

  /// Accounts in ascending id order; the canonical row order of every view.
  const std::vector<const AccountProfile*>& ordered() const { return ordered_; }
  std::size_t index_of(const AccountId& id) const;

  Day snapshot() const { return snapshot_; }
  /// Days between registration and the corpus snapshot.
  std::int64_t account_age_days(const AccountProfile& a) const { return snapshot_ - a.registered_at; }
  std::size_t dangling_edges() const { return dangling_edges_; }

  bool operator==(const Corpus& other) const {
    return snapshot_ == other.snapshot_ && accounts_ == other.accounts_;
  }

 private:
  std::map<AccountId, AccountProfile> accounts_;
  std::vector<const AccountProfile*> ordered_;
  std::map<AccountId, std::size_t> index_;
  Day snapshot_ = 0;
  std::size_t dangling_edges_ = 0;
};

enum class PairLabel { cloned, legitimate };
enum class LabelKind { clean, weak };

std::string_view to_string(PairLabel l);
std::string_view to_string(LabelKind k);
PairLabel parse_pair_label(std::string_view s);
LabelKind parse_label_kind(std::string_view s);

struct LabeledPair {
  AccountId older_id;
  AccountId newer_id;
  PairLabel label = PairLabel::legitimate;
  LabelKind label_kind = LabelKind::clean;

  bool operator==(const LabeledPair&) const = default;
};

/// JSONL corpus. An optional leading {"snapshot_at": date} record carries the
/// crawl time; without it the latest registration date is used.
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus_jsonl(std::istream& in);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
void write_corpus_jsonl(const Corpus& corpus, std::ostream& out);

/// CSV with header `older_id,newer_id,label,label_kind`.
std::vector<LabeledPair> load_labeled_pairs(const std::filesystem::path& path);
void save_labeled_pairs(const std::vector<LabeledPair>& pairs, const std::filesystem::path& path);

/// Splits one CSV line. Fields never contain commas in any file we write.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace clonewatch
