#pragma once

#include <memory>
#include <string>

#include "clonewatch/pairing.hpp"

namespace clonewatch::ibe {

/// <e, n, G, GT, P, P_pub, H1, H2>. The hashes are fixed functions of the
/// group, so the key carries the group, n, P and P_pub.
struct MasterPublicKey {
  std::shared_ptr<const PairingGroup> group;
  int security = 0;
  std::size_t message_bits = 256;
  GroupElement P;
  GroupElement P_pub;

  /// LP(group name) || u32(security) || u32(n) || LP(P) || LP(P_pub)
  Bytes serialize() const;
  static MasterPublicKey deserialize(ByteView bytes);
};

/// Master secret s in [1, q-1]. Deliberately has no serialization.
struct MasterSecretKey {
  Scalar s;
};

struct IdentityPrivateKey {
  std::string identity;
  GroupElement d;

  /// LP(identity) || LP(d)
  Bytes serialize() const;
  static IdentityPrivateKey deserialize(const MasterPublicKey& mpk, ByteView bytes);
  bool operator==(const IdentityPrivateKey&) const = default;
};

struct Ciphertext {
  GroupElement U;
  Bytes V;

  /// LP(U) || LP(V)
  Bytes serialize() const;
  static Ciphertext deserialize(const MasterPublicKey& mpk, ByteView bytes);
};

/// Throws CapabilityError if the group has no pairing or `security` lies
/// outside its supported range; ValidationError unless message_bits is a
/// positive multiple of 8.
std::pair<MasterPublicKey, MasterSecretKey> setup(int security, std::shared_ptr<const PairingGroup> group,
                                                  RandomSource& rng, std::size_t message_bits = 256);

GroupElement h1(const MasterPublicKey& mpk, std::string_view identity);
/// SHA-256 in counter mode over a domain tag and the target encoding, cut to `bits`.
Bytes h2(const TargetElement& g, std::size_t bits);

IdentityPrivateKey extract(const MasterSecretKey& msk, const MasterPublicKey& mpk, std::string_view identity);

/// e(d, P) == e(H1(identity), P_pub).
bool verify_key(const MasterPublicKey& mpk, const IdentityPrivateKey& key);

Ciphertext encrypt(const MasterPublicKey& mpk, std::string_view identity, ByteView message, RandomSource& rng);
Bytes decrypt(const MasterPublicKey& mpk, const IdentityPrivateKey& key, const Ciphertext& c);

}  // namespace clonewatch::ibe
