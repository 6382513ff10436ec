#include <fstream>
#include <nlohmann/json.hpp>

#include "clonewatch/errors.hpp"
#include "clonewatch/protocol.hpp"

namespace clonewatch::protocol {

using nlohmann::json;

PairStore::PairStore(std::optional<std::filesystem::path> journal) : journal_(std::move(journal)) {
  if (!journal_ || !std::filesystem::exists(*journal_)) return;
  std::ifstream in(*journal_);
  if (!in) throw ConfigError("cannot read journal " + journal_->string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string id = j.at("pair_id").get<std::string>();
      const std::string op = j.at("op").get<std::string>();
      clock_ = std::max(clock_, j.at("at").get<std::uint64_t>());
      if (op == "add") {
        Entry e;
        e.older_id = j.at("older_id").get<std::string>();
        e.newer_id = j.at("newer_id").get<std::string>();
        e.older_registered = j.at("older_registered").get<Day>();
        e.newer_registered = j.at("newer_registered").get<Day>();
        e.created = e.updated = j.at("at").get<std::uint64_t>();
        entries_.try_emplace(id, std::move(e));
      } else if (op == "status") {
        auto it = entries_.find(id);
        if (it == entries_.end()) throw ParseError("status for unknown pair " + id, line_no);
        if (it->second.status == AuthStatus::null) {
          it->second.status = parse_auth_status(j.at("status").get<std::string>());
          it->second.updated = j.at("at").get<std::uint64_t>();
        }
      } else {
        throw ParseError("unknown journal op '" + op + "'", line_no);
      }
    } catch (const json::exception& e) {
      throw ParseError(std::string("journal: ") + e.what(), line_no);
    }
  }
}

void PairStore::append(const std::string& line) {
  if (!journal_) return;
  std::ofstream out(*journal_, std::ios::app);
  out << line << '\n';
  out.flush();
  if (!out) throw ConfigError("cannot write journal " + journal_->string());
}

void PairStore::add(const std::string& pair_id, const Entry& entry) {
  if (entries_.count(pair_id)) return;
  Entry e = entry;
  e.status = AuthStatus::null;
  e.created = e.updated = ++clock_;
  append(json{{"op", "add"},
              {"pair_id", pair_id},
              {"older_id", e.older_id},
              {"newer_id", e.newer_id},
              {"older_registered", e.older_registered},
              {"newer_registered", e.newer_registered},
              {"at", e.created}}
             .dump());
  entries_.emplace(pair_id, std::move(e));
}

bool PairStore::transition(const std::string& pair_id, AuthStatus to) {
  if (to == AuthStatus::null) throw ValidationError("cannot transition to null");
  auto it = entries_.find(pair_id);
  if (it == entries_.end()) throw LookupError("unknown pair " + pair_id);
  if (it->second.status != AuthStatus::null) return false;
  const std::uint64_t at = ++clock_;
  append(json{{"op", "status"}, {"pair_id", pair_id}, {"status", to_string(to)}, {"at", at}}.dump());
  it->second.status = to;
  it->second.updated = at;
  return true;
}

const PairStore::Entry& PairStore::at(const std::string& pair_id) const {
  auto it = entries_.find(pair_id);
  if (it == entries_.end()) throw LookupError("unknown pair " + pair_id);
  return it->second;
}

}  // namespace clonewatch::protocol
