#include <openssl/crypto.h>

#include <nlohmann/json.hpp>
#include <thread>

#include "clonewatch/aead.hpp"
#include "clonewatch/errors.hpp"
#include "clonewatch/protocol.hpp"

namespace clonewatch::protocol {

namespace {

bool equal_secret(ByteView a, ByteView b) {
  return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

Clock steady_seconds() {
  return [] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
  };
}

Message reply(MessageKind kind, const Message& to, Bytes payload) {
  return Message{kind, to.to, to.from, to.pair_id, std::move(payload)};
}

}  // namespace

// ------------------------------------------------------------------------- AA

AaActor::AaActor(std::string id, std::shared_ptr<const ibe::PairingGroup> group, int security, RandomSource& rng,
                 AaOptions options, SecretLedger* ledger, Clock clock)
    : Actor(std::move(id)),
      rng_(rng),
      options_(options),
      ledger_(ledger),
      clock_(clock ? std::move(clock) : steady_seconds()) {
  auto [mpk, msk] = ibe::setup(security, std::move(group), rng_, options_.message_bits);
  mpk_ = std::move(mpk);
  msk_ = std::move(msk);
  own_key_ = ibe::extract(msk_, mpk_, this->id());
}

ibe::IdentityPrivateKey AaActor::issue(std::string_view identity) const { return ibe::extract(msk_, mpk_, identity); }

std::size_t AaActor::cached_sessions() {
  expire_sessions();
  return sessions_.size();
}

void AaActor::expire_sessions() {
  const double now = clock_();
  std::erase_if(sessions_, [now](const auto& kv) { return kv.second.second <= now; });
}

std::vector<Message> AaActor::handle(const Message& m) {
  switch (m.kind) {
    case MessageKind::KeyRequest: return on_key_request(m);
    case MessageKind::PairNotify: return on_pair_notify(m);
    case MessageKind::ChallengeResponse: return on_challenge_response(m);
    default: throw ValidationError("AA cannot handle " + std::string(to_string(m.kind)));
  }
}

std::vector<Message> AaActor::on_key_request(const Message& m) {
  expire_sessions();
  Bytes session_key;
  if (options_.encryption_disabled) {
    session_key = m.payload;
  } else {
    const Bytes plain = ibe::decrypt(mpk_, own_key_, ibe::Ciphertext::deserialize(mpk_, m.payload));
    session_key.assign(plain.begin(), plain.begin() + aead::kKeyBytes);
  }
  if (session_key.size() != aead::kKeyBytes) throw DecodeError("bad session key length");
  sessions_[m.from] = {session_key, clock_() + options_.session_ttl_seconds};

  ibe::IdentityPrivateKey key = issue(m.from);
  if (options_.issue_wrong_identity) key.d = issue(m.from + "#").d;
  if (ledger_) ledger_->record("d_user:" + m.from, key.d.bytes);

  const Bytes serialized = key.serialize();
  Bytes payload = options_.encryption_disabled ? serialized : aead::wrap(session_key, serialized, rng_);
  return {reply(MessageKind::KeyResponse, m, std::move(payload))};
}

std::vector<Message> AaActor::on_pair_notify(const Message& m) {
  if (!m.pair_id) throw DecodeError("pair_notify without pair_id");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(to_string(m.payload));
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("pair_notify: ") + e.what());
  }
  std::string a = j.at("older_id"), b = j.at("newer_id");
  const Day ra = j.at("older_registered"), rb = j.at("newer_registered");
  if (std::tie(rb, b) < std::tie(ra, a)) std::swap(a, b);

  Pending p{a, b, rng_.bytes(mpk_.message_bits / 8), rng_.bytes(mpk_.message_bits / 8),
            ++rounds_[*m.pair_id], m.from};
  if (ledger_) {
    const std::string tag = *m.pair_id + "#" + std::to_string(p.round);
    ledger_->record("challenge_old:" + tag, p.m_old);
    ledger_->record("challenge_new:" + tag, p.m_new);
  }
  Bytes payload;
  append_lp(payload, to_bytes(p.older_id));
  append_lp(payload, to_bytes(p.newer_id));
  append_u32(payload, p.round);
  if (options_.encryption_disabled) {
    append_lp(payload, p.m_old);
    append_lp(payload, p.m_new);
  } else {
    append_lp(payload, ibe::encrypt(mpk_, p.older_id, p.m_old, rng_).serialize());
    append_lp(payload, ibe::encrypt(mpk_, p.newer_id, p.m_new, rng_).serialize());
  }
  Message challenge{MessageKind::Challenge, id(), p.newer_id, m.pair_id, std::move(payload)};
  pending_[*m.pair_id] = std::move(p);
  return {std::move(challenge)};
}

std::vector<Message> AaActor::on_challenge_response(const Message& m) {
  if (!m.pair_id) throw DecodeError("challenge_response without pair_id");
  auto it = pending_.find(*m.pair_id);
  if (it == pending_.end()) return {};
  const Pending& p = it->second;

  bool ok = false;
  try {
    ByteReader in(m.payload);
    if (in.u32() != p.round) return {};  // stale round
    Bytes first = in.lp(), second = in.lp();
    in.expect_done();
    if (!options_.encryption_disabled) {
      first = ibe::decrypt(mpk_, own_key_, ibe::Ciphertext::deserialize(mpk_, first));
      second = ibe::decrypt(mpk_, own_key_, ibe::Ciphertext::deserialize(mpk_, second));
    }
    ok = m.from == p.newer_id && equal_secret(first, p.m_old) && equal_secret(second, p.m_new);
  } catch (const DecodeError&) {
    ok = false;
  }
  const AuthStatus status = ok ? AuthStatus::successful : AuthStatus::unsuccessful;
  Message result{MessageKind::AuthResult, id(), p.reply_to, m.pair_id, to_bytes(to_string(status))};
  pending_.erase(it);
  return {std::move(result)};
}

// ------------------------------------------------------------------------- CS

CsActor::CsActor(std::string id, std::string aa_id, std::optional<std::filesystem::path> journal)
    : Actor(std::move(id)), aa_id_(std::move(aa_id)), store_(std::move(journal)) {}

void CsActor::register_pair(const CandidatePair& pair, Day older_registered, Day newer_registered) {
  PairStore::Entry e;
  e.older_id = pair.older_id;
  e.newer_id = pair.newer_id;
  e.older_registered = older_registered;
  e.newer_registered = newer_registered;
  store_.add(pair.pair_id(), e);
}

Message CsActor::start_authentication(const std::string& pair_id) const {
  const auto& e = store_.at(pair_id);
  if (e.status != AuthStatus::null) throw ValidationError("pair " + pair_id + " already authenticated");
  const nlohmann::json j{{"older_id", e.older_id},
                         {"newer_id", e.newer_id},
                         {"older_registered", e.older_registered},
                         {"newer_registered", e.newer_registered}};
  return Message{MessageKind::PairNotify, id(), aa_id_, pair_id, to_bytes(j.dump())};
}

std::vector<Message> CsActor::handle(const Message& m) {
  if (m.kind != MessageKind::AuthResult) throw ValidationError("CS cannot handle " + std::string(to_string(m.kind)));
  if (!m.pair_id) throw DecodeError("auth_result without pair_id");
  if (m.from != aa_id_) return {};
  const AuthStatus status = parse_auth_status(to_string(m.payload));
  if (status != AuthStatus::null) store_.transition(*m.pair_id, status);
  return {};
}

// ----------------------------------------------------------------------- user

UserActor::UserActor(AccountId account, Day registered_at, const ibe::MasterPublicKey& mpk, std::string aa_id,
                     RandomSource& rng, SecretLedger* ledger, bool encryption_disabled)
    : Actor(std::move(account)),
      registered_at_(registered_at),
      mpk_(mpk),
      aa_id_(std::move(aa_id)),
      rng_(rng),
      ledger_(ledger),
      encryption_disabled_(encryption_disabled) {
  if (mpk_.message_bits < 8 * aead::kKeyBytes) throw ConfigError("message space too small for a session key");
}

Message UserActor::request_key() {
  session_key_ = rng_.bytes(aead::kKeyBytes);
  if (ledger_) ledger_->record("session_key:" + id(), *session_key_);
  Bytes payload;
  if (encryption_disabled_) {
    payload = *session_key_;
  } else {
    Bytes padded(mpk_.message_bits / 8, 0);
    std::copy(session_key_->begin(), session_key_->end(), padded.begin());
    payload = ibe::encrypt(mpk_, aa_id_, padded, rng_).serialize();
  }
  return Message{MessageKind::KeyRequest, id(), aa_id_, std::nullopt, std::move(payload)};
}

void UserActor::add_key(const ibe::IdentityPrivateKey& key) {
  if (!ibe::verify_key(mpk_, key)) throw KeyInvalidError("key for '" + key.identity + "' does not verify");
  key_ring_.insert_or_assign(key.identity, key);
}

std::vector<Message> UserActor::handle(const Message& m) {
  switch (m.kind) {
    case MessageKind::KeyResponse: return on_key_response(m);
    case MessageKind::Challenge: return on_challenge(m);
    default: throw ValidationError("user cannot handle " + std::string(to_string(m.kind)));
  }
}

std::vector<Message> UserActor::on_key_response(const Message& m) {
  if (!session_key_) throw KeyDeliveryError("unsolicited key response");
  Bytes serialized;
  ibe::IdentityPrivateKey key;
  try {
    serialized = encryption_disabled_ ? m.payload : aead::unwrap(*session_key_, m.payload);
    key = ibe::IdentityPrivateKey::deserialize(mpk_, serialized);
  } catch (const AuthenticationError& e) {
    throw KeyDeliveryError(std::string("key response failed authentication: ") + e.what());
  } catch (const DecodeError& e) {
    throw KeyDeliveryError(std::string("key response malformed: ") + e.what());
  }
  session_key_.reset();
  if (key.identity != id()) throw KeyInvalidError("key issued for '" + key.identity + "', expected '" + id() + "'");
  add_key(key);
  return {};
}

std::vector<Message> UserActor::on_challenge(const Message& m) {
  ByteReader in(m.payload);
  const std::string older = to_string(in.lp()), newer = to_string(in.lp());
  const std::uint32_t round = in.u32();
  const Bytes c_old = in.lp(), c_new = in.lp();
  in.expect_done();

  const auto answer = [&](const std::string& identity, const Bytes& c) -> Bytes {
    if (encryption_disabled_) return c;
    auto key = key_ring_.find(identity);
    // Without the key the best a holder can do is guess.
    if (key == key_ring_.end()) return rng_.bytes(mpk_.message_bits / 8);
    return ibe::decrypt(mpk_, key->second, ibe::Ciphertext::deserialize(mpk_, c));
  };
  const Bytes m_old = answer(older, c_old), m_new = answer(newer, c_new);

  Bytes payload;
  append_u32(payload, round);
  if (encryption_disabled_) {
    append_lp(payload, m_old);
    append_lp(payload, m_new);
  } else {
    append_lp(payload, ibe::encrypt(mpk_, aa_id_, m_old, rng_).serialize());
    append_lp(payload, ibe::encrypt(mpk_, aa_id_, m_new, rng_).serialize());
  }
  return {reply(MessageKind::ChallengeResponse, m, std::move(payload))};
}

// -------------------------------------------------------------------- drivers

void Simulation::add(Actor& actor) { actors_[actor.id()] = &actor; }

std::size_t Simulation::pump() {
  std::size_t delivered = 0;
  while (auto m = transport_.next()) {
    auto it = actors_.find(m->to);
    if (it == actors_.end()) throw TransportError("no actor '" + m->to + "'");
    ++delivered;
    for (const auto& out : it->second->handle(*m)) transport_.send(out);
  }
  return delivered;
}

ibe::IdentityPrivateKey run_key_generation(UserActor& user, AaActor& aa, Transport& transport) {
  Simulation sim(transport);
  sim.add(user);
  sim.add(aa);
  sim.send(user.request_key());
  sim.pump();
  auto it = user.key_ring().find(user.id());
  if (it == user.key_ring().end()) throw TransportError("no key response for '" + user.id() + "'");
  return it->second;
}

std::map<std::string, AuthOutcome> run_authentication_batch(const std::vector<std::string>& pair_ids, CsActor& cs,
                                                            AaActor& aa, std::map<std::string, UserActor*> users,
                                                            Transport& transport, const RetryPolicy& retry) {
  if (retry.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
  Simulation sim(transport);
  sim.add(cs);
  sim.add(aa);
  for (auto& [id, user] : users) sim.add(*user);

  std::map<std::string, AuthOutcome> outcomes;
  std::vector<std::string> open;
  for (const auto& id : pair_ids) {
    outcomes[id].status = cs.status(id);
    if (outcomes[id].status == AuthStatus::null) open.push_back(id);
  }
  for (int attempt = 1; attempt <= retry.max_attempts && !open.empty(); ++attempt) {
    if (attempt > 1 && retry.base_backoff.count() > 0) std::this_thread::sleep_for(retry.base_backoff * (1 << (attempt - 2)));
    for (const auto& id : open) {
      sim.send(cs.start_authentication(id));
      outcomes[id].attempts = attempt;
    }
    sim.pump();
    std::vector<std::string> still_open;
    for (const auto& id : open) {
      outcomes[id].status = cs.status(id);
      if (outcomes[id].status == AuthStatus::null) still_open.push_back(id);
    }
    open.swap(still_open);
  }
  for (const auto& id : open) outcomes[id].flagged = true;
  return outcomes;
}

AuthOutcome run_authentication(const std::string& pair_id, CsActor& cs, AaActor& aa, UserActor& newer_user,
                               Transport& transport, const RetryPolicy& retry) {
  return run_authentication_batch({pair_id}, cs, aa, {{newer_user.id(), &newer_user}}, transport, retry).at(pair_id);
}

}  // namespace clonewatch::protocol
