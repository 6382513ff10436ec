#pragma once

#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "clonewatch/ibe.hpp"
#include "clonewatch/model.hpp"
#include "clonewatch/pairgraph.hpp"

namespace clonewatch::protocol {

using clonewatch::to_string;

enum class MessageKind { KeyRequest, KeyResponse, PairNotify, Challenge, ChallengeResponse, AuthResult };

std::string_view to_string(MessageKind k);
MessageKind parse_message_kind(std::string_view s);

struct Message {
  MessageKind kind = MessageKind::KeyRequest;
  std::string from;
  std::string to;
  std::optional<std::string> pair_id;
  Bytes payload;

  /// {"kind","from","to","pair_id"?,"payload": base64}
  std::string to_json() const;
  static Message from_json(std::string_view text);
};

/// 4-byte big-endian length followed by the JSON document.
Bytes encode_frame(const Message& m);
Message decode_frame(ByteView frame);

// ---------------------------------------------------------------- transports

class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(const Message& m) = 0;
  /// Next deliverable message, or nullopt when nothing is in flight.
  virtual std::optional<Message> next() = 0;
  /// Every frame that crossed the wire, in send order.
  virtual const std::vector<Bytes>& transcript() const = 0;
};

/// FIFO queue; with a shuffle seed, each delivery picks a random pending message.
class InMemoryTransport final : public Transport {
 public:
  InMemoryTransport() = default;
  explicit InMemoryTransport(std::uint64_t shuffle_seed) : shuffle_(true), rng_(shuffle_seed) {}
  void send(const Message& m) override;
  std::optional<Message> next() override;
  const std::vector<Bytes>& transcript() const override { return transcript_; }

 private:
  std::deque<Bytes> queue_;
  std::vector<Bytes> transcript_;
  bool shuffle_ = false;
  Rng rng_{0};
};

/// Frames travel through a real loopback TCP connection.
class TcpTransport final : public Transport {
 public:
  TcpTransport();
  ~TcpTransport() override;
  TcpTransport(const TcpTransport&) = delete;
  TcpTransport& operator=(const TcpTransport&) = delete;
  void send(const Message& m) override;
  std::optional<Message> next() override;
  const std::vector<Bytes>& transcript() const override { return transcript_; }
  std::uint16_t port() const { return port_; }

 private:
  int listener_ = -1, client_ = -1, server_ = -1;
  std::uint16_t port_ = 0;
  std::size_t in_flight_ = 0;
  std::vector<Bytes> transcript_;
};

/// Drops messages chosen by a predicate, simulating timeouts.
class LossyTransport final : public Transport {
 public:
  using DropRule = std::function<bool(const Message&)>;
  LossyTransport(Transport& inner, DropRule drop) : inner_(inner), drop_(std::move(drop)) {}
  void send(const Message& m) override;
  std::optional<Message> next() override { return inner_.next(); }
  const std::vector<Bytes>& transcript() const override { return inner_.transcript(); }
  std::size_t dropped() const { return dropped_; }

 private:
  Transport& inner_;
  DropRule drop_;
  std::size_t dropped_ = 0;
};

// -------------------------------------------------------------------- audit

/// Secrets generated during a run, recorded so transcripts can be scanned for them.
class SecretLedger {
 public:
  void record(std::string field, Bytes secret);
  const std::vector<std::pair<std::string, Bytes>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, Bytes>> entries_;
};

struct AuditFinding {
  std::string field;
  bool leaked = false;
};

struct AuditReport {
  std::vector<AuditFinding> findings;
  bool passed() const;
  std::vector<std::string> leaked_fields() const;
};

/// Looks for every recorded secret in the raw frames and in the decoded payloads.
AuditReport eavesdrop_audit(const std::vector<Bytes>& transcript, const SecretLedger& ledger);

// ------------------------------------------------------------------- actors

using Clock = std::function<double()>;  // seconds

class Actor {
 public:
  explicit Actor(std::string id) : id_(std::move(id)) {}
  virtual ~Actor() = default;
  const std::string& id() const { return id_; }
  virtual std::vector<Message> handle(const Message& m) = 0;

 private:
  std::string id_;
};

struct AaOptions {
  double session_ttl_seconds = 300.0;
  std::size_t message_bits = 256;
  /// Test hook: plaintext payloads, for the audit self-test.
  bool encryption_disabled = false;
  /// Test hook: issue keys for a different identity than requested.
  bool issue_wrong_identity = false;
};

/// Attribute authority: holds the master secret and the only copy of its own private key.
class AaActor final : public Actor {
 public:
  AaActor(std::string id, std::shared_ptr<const ibe::PairingGroup> group, int security, RandomSource& rng,
          AaOptions options = {}, SecretLedger* ledger = nullptr, Clock clock = {});

  const ibe::MasterPublicKey& mpk() const { return mpk_; }
  std::vector<Message> handle(const Message& m) override;
  /// Issues a key directly (registration outside the protocol, used to set up scenarios).
  ibe::IdentityPrivateKey issue(std::string_view identity) const;
  std::size_t cached_sessions();

 private:
  struct Pending {
    std::string older_id, newer_id;
    Bytes m_old, m_new;
    std::uint32_t round = 0;
    std::string reply_to;
  };
  std::vector<Message> on_key_request(const Message& m);
  std::vector<Message> on_pair_notify(const Message& m);
  std::vector<Message> on_challenge_response(const Message& m);
  void expire_sessions();

  ibe::MasterPublicKey mpk_;
  ibe::MasterSecretKey msk_;
  ibe::IdentityPrivateKey own_key_;
  RandomSource& rng_;
  AaOptions options_;
  SecretLedger* ledger_;
  Clock clock_;
  std::map<std::string, std::pair<Bytes, double>> sessions_;  // user -> (key, expiry)
  std::map<std::string, Pending> pending_;
  std::map<std::string, std::uint32_t> rounds_;
};

/// Append-only JSONL journal of pair registrations and status transitions.
class PairStore {
 public:
  struct Entry {
    AccountId older_id, newer_id;
    Day older_registered = 0, newer_registered = 0;
    AuthStatus status = AuthStatus::null;
    std::uint64_t created = 0, updated = 0;  ///< logical timestamps
  };

  explicit PairStore(std::optional<std::filesystem::path> journal = std::nullopt);
  void add(const std::string& pair_id, const Entry& entry);
  /// Moves a null status to a terminal one. Returns false (and changes
  /// nothing) when the pair already has a terminal status.
  bool transition(const std::string& pair_id, AuthStatus to);
  const Entry& at(const std::string& pair_id) const;
  bool contains(const std::string& pair_id) const { return entries_.count(pair_id) > 0; }
  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  void append(const std::string& line);
  std::optional<std::filesystem::path> journal_;
  std::map<std::string, Entry> entries_;
  std::uint64_t clock_ = 0;
};

/// Cloud service: stores detected pairs and asks the AA to authenticate them.
class CsActor final : public Actor {
 public:
  CsActor(std::string id, std::string aa_id, std::optional<std::filesystem::path> journal = std::nullopt);
  void register_pair(const CandidatePair& pair, Day older_registered, Day newer_registered);
  /// PairNotify for the AA; ValidationError unless the pair is still null.
  Message start_authentication(const std::string& pair_id) const;
  std::vector<Message> handle(const Message& m) override;
  AuthStatus status(const std::string& pair_id) const { return store_.at(pair_id).status; }
  const PairStore& store() const { return store_; }

 private:
  std::string aa_id_;
  PairStore store_;
};

class UserActor final : public Actor {
 public:
  UserActor(AccountId account, Day registered_at, const ibe::MasterPublicKey& mpk, std::string aa_id,
            RandomSource& rng, SecretLedger* ledger = nullptr, bool encryption_disabled = false);

  /// Fresh session key and a KeyRequest for the AA.
  Message request_key();
  std::vector<Message> handle(const Message& m) override;
  /// Adds a key obtained out of band; KeyInvalidError if it does not verify.
  void add_key(const ibe::IdentityPrivateKey& key);
  const std::map<std::string, ibe::IdentityPrivateKey>& key_ring() const { return key_ring_; }
  Day registered_at() const { return registered_at_; }

 private:
  std::vector<Message> on_key_response(const Message& m);
  std::vector<Message> on_challenge(const Message& m);

  Day registered_at_;
  const ibe::MasterPublicKey& mpk_;
  std::string aa_id_;
  RandomSource& rng_;
  SecretLedger* ledger_;
  bool encryption_disabled_;
  std::optional<Bytes> session_key_;
  std::map<std::string, ibe::IdentityPrivateKey> key_ring_;
};

// ------------------------------------------------------------------ drivers

/// Routes messages between registered actors until the transport is idle.
class Simulation {
 public:
  explicit Simulation(Transport& transport) : transport_(transport) {}
  void add(Actor& actor);
  void send(const Message& m) { transport_.send(m); }
  /// Delivers until idle; returns the number of messages delivered.
  std::size_t pump();
  Transport& transport() { return transport_; }

 private:
  Transport& transport_;
  std::map<std::string, Actor*> actors_;
};

/// KeyRequest / KeyResponse for one user. Errors propagate from the actors.
ibe::IdentityPrivateKey run_key_generation(UserActor& user, AaActor& aa, Transport& transport);

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_backoff{100};
};

struct AuthOutcome {
  AuthStatus status = AuthStatus::null;
  int attempts = 0;
  /// Still null after every attempt: needs manual investigation.
  bool flagged = false;
};

/// Challenge/response for one pair, retrying with exponential backoff when
/// the exchange stalls (lost message).
AuthOutcome run_authentication(const std::string& pair_id, CsActor& cs, AaActor& aa, UserActor& newer_user,
                               Transport& transport, const RetryPolicy& retry = {});

/// Authenticates many pairs over one shared transport; messages of different
/// pairs may interleave in any order the transport chooses.
std::map<std::string, AuthOutcome> run_authentication_batch(const std::vector<std::string>& pair_ids, CsActor& cs,
                                                            AaActor& aa, std::map<std::string, UserActor*> users,
                                                            Transport& transport, const RetryPolicy& retry = {});

}  // namespace clonewatch::protocol
