#include <fstream>
#include <set>

#include "clonewatch/errors.hpp"
#include "clonewatch/pipeline.hpp"

namespace clonewatch::pipeline {

using nlohmann::json;

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario " + path.string());
  try {
    const json j = json::parse(in);
    Scenario s;
    for (const auto& [holder, identities] : j.at("holders").items())
      s.holders[holder] = identities.get<std::vector<AccountId>>();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError("scenario " + path.string() + ": " + e.what());
  }
}

void save_scenario(const Scenario& scenario, const fs::path& path) {
  std::ofstream out(path);
  out << json{{"holders", scenario.holders}}.dump(2) << '\n';
  if (!out) throw Error("cannot write " + path.string());
}

Scenario scenario_from_truth(const std::vector<LabeledPair>& truth, const std::vector<CandidatePair>& pairs) {
  std::set<std::pair<AccountId, AccountId>> duplicates;
  for (const auto& t : truth)
    if (t.label == PairLabel::legitimate) duplicates.insert({t.older_id, t.newer_id});
  Scenario s;
  for (const auto& p : pairs) {
    auto& held = s.holders[p.newer_id];
    if (held.empty()) held.push_back(p.newer_id);
  }
  for (const auto& [older, newer] : duplicates) {
    auto& held = s.holders[newer];
    if (held.empty()) held.push_back(newer);
    if (std::find(held.begin(), held.end(), older) == held.end()) held.push_back(older);
  }
  return s;
}

AuthenticationReport authenticate(std::vector<PairRecord> records, const Scenario& scenario, const Corpus& corpus,
                                  const PipelineConfig& config) {
  using namespace protocol;
  auto group = ibe::make_pairing_group(config.protocol.backend);
  const int security = config.protocol.security.value_or(group->default_security());
  SeededRandom rng(derive_seed(config.seed, 6));
  SecretLedger ledger;
  AaOptions aa_options;
  aa_options.message_bits = config.protocol.message_bits;
  AaActor aa("aa", group, security, rng, aa_options, &ledger);
  CsActor cs("cs", aa.id());
  InMemoryTransport transport;

  std::map<AccountId, ibe::IdentityPrivateKey> issued;
  const auto key_for = [&](const AccountId& identity) -> const ibe::IdentityPrivateKey& {
    auto it = issued.find(identity);
    if (it != issued.end()) return it->second;
    UserActor registrant(identity, corpus.at(identity).registered_at, aa.mpk(), aa.id(), rng, &ledger);
    return issued.emplace(identity, run_key_generation(registrant, aa, transport)).first->second;
  };

  std::map<AccountId, std::unique_ptr<UserActor>> holders;
  std::vector<std::string> to_run;
  json skipped = json::array();
  for (const auto& r : records) {
    const auto& pair = r.pair;
    if (pair.predicted != PairLabel::cloned) continue;
    const std::string id = pair.pair_id();
    std::string reason;
    if (!corpus.contains(pair.older_id) || !corpus.contains(pair.newer_id))
      reason = "account not in corpus";
    else if (!scenario.holders.count(pair.newer_id))
      reason = "no scenario entry for " + pair.newer_id;
    if (!reason.empty()) {
      skipped.push_back({{"pair_id", id}, {"reason", reason}});
      continue;
    }
    if (!holders.count(pair.newer_id)) {
      auto holder = std::make_unique<UserActor>(pair.newer_id, corpus.at(pair.newer_id).registered_at, aa.mpk(),
                                                aa.id(), rng, &ledger);
      for (const auto& identity : scenario.holders.at(pair.newer_id)) {
        if (!corpus.contains(identity)) throw ConfigError("scenario names unknown account " + identity);
        holder->add_key(key_for(identity));
      }
      holders.emplace(pair.newer_id, std::move(holder));
    }
    cs.register_pair(pair, corpus.at(pair.older_id).registered_at, corpus.at(pair.newer_id).registered_at);
    to_run.push_back(id);
  }

  std::map<std::string, UserActor*> users;
  for (auto& [id, holder] : holders) users[id] = holder.get();
  const RetryPolicy retry{config.protocol.max_attempts, std::chrono::milliseconds(config.protocol.backoff_ms)};
  const auto outcomes = run_authentication_batch(to_run, cs, aa, users, transport, retry);
  const auto audit = eavesdrop_audit(transport.transcript(), ledger);

  std::size_t successful = 0, unsuccessful = 0, final_cloned = 0;
  json investigate = json::array(), cloned_ids = json::array();
  for (auto& r : records) {
    auto& pair = r.pair;
    const auto it = outcomes.find(pair.pair_id());
    pair.auth_status = it == outcomes.end() ? AuthStatus::null : it->second.status;
    if (pair.predicted != PairLabel::cloned) {
      r.final_verdict = PairLabel::legitimate;
    } else if (pair.auth_status == AuthStatus::successful) {
      r.final_verdict = PairLabel::legitimate;
      ++successful;
    } else if (pair.auth_status == AuthStatus::unsuccessful) {
      r.final_verdict = PairLabel::cloned;
      ++unsuccessful;
      ++final_cloned;
      cloned_ids.push_back(pair.pair_id());
    } else {
      r.final_verdict.reset();
      if (it != outcomes.end() && it->second.flagged) investigate.push_back(pair.pair_id());
    }
  }

  json summary{
      {"backend", group->name()},
      {"security", security},
      {"predicted_cloned", to_run.size() + skipped.size()},
      {"authenticated", to_run.size()},
      {"successful", successful},
      {"unsuccessful", unsuccessful},
      {"final_cloned", final_cloned},
      {"final_cloned_pairs", cloned_ids},
      {"skipped", skipped},
      {"needs_investigation", investigate},
      {"private_keys_issued", issued.size()},
      {"messages", transport.transcript().size()},
      {"audit", {{"passed", audit.passed()}, {"leaked", audit.leaked_fields()}, {"secrets_checked", audit.findings.size()}}},
  };
  return {std::move(records), std::move(summary)};
}

json cmd_authenticate(const PipelineConfig& config, const fs::path& pairs_csv, const fs::path& scenario_path) {
  config.validate();
  const Scenario scenario = load_scenario(scenario_path);
  std::vector<PairRecord> records;
  try {
    records = load_pairs_csv(pairs_csv);
  } catch (const ParseError& e) {
    throw ConfigError("pairs " + pairs_csv.string() + ": " + e.what());
  }
  Dataset data;
  try {
    data = load_dataset(config);
  } catch (const Error& e) {
    throw StageError("ingest", e.what());
  }
  AuthenticationReport report;
  try {
    report = authenticate(std::move(records), scenario, data.corpus, config);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("authenticate", e.what());
  }
  fs::create_directories(config.output_dir);
  save_pairs_csv(report.records, config.output_dir / "pairs_final.csv", true);
  std::ofstream out(config.output_dir / "auth_report.json");
  out << report.summary.dump(2) << '\n';
  return report.summary;
}

}  // namespace clonewatch::pipeline
