#include "clonewatch/ibe.hpp"

#include "clonewatch/errors.hpp"

namespace clonewatch::ibe {

namespace {

void require_pairing(const PairingGroup& g) {
  if (!g.supports_pairing()) throw CapabilityError("backend '" + g.name() + "' provides no bilinear pairing");
}

}  // namespace

std::pair<MasterPublicKey, MasterSecretKey> setup(int security, std::shared_ptr<const PairingGroup> group,
                                                  RandomSource& rng, std::size_t message_bits) {
  if (!group) throw CapabilityError("no pairing backend");
  require_pairing(*group);
  const auto [lo, hi] = group->security_range();
  if (security < lo || security > hi)
    throw CapabilityError("backend '" + group->name() + "' supports security " + std::to_string(lo) + ".." +
                          std::to_string(hi) + ", got " + std::to_string(security));
  if (message_bits == 0 || message_bits % 8 != 0) throw ValidationError("message length must be a positive multiple of 8 bits");
  MasterSecretKey msk{group->random_scalar(rng)};
  MasterPublicKey mpk;
  mpk.group = group;
  mpk.security = security;
  mpk.message_bits = message_bits;
  mpk.P = group->generator();
  mpk.P_pub = group->multiply(mpk.P, msk.s);
  return {std::move(mpk), std::move(msk)};
}

GroupElement h1(const MasterPublicKey& mpk, std::string_view identity) { return mpk.group->hash_to_group(identity); }

Bytes h2(const TargetElement& g, std::size_t bits) {
  const std::size_t want = (bits + 7) / 8;
  Bytes out;
  for (std::uint32_t counter = 0; out.size() < want; ++counter) {
    Bytes block = to_bytes("clonewatch-h2");
    append_u32(block, counter);
    block.insert(block.end(), g.bytes.begin(), g.bytes.end());
    const Bytes d = sha256(block);
    out.insert(out.end(), d.begin(), d.end());
  }
  out.resize(want);
  return out;
}

IdentityPrivateKey extract(const MasterSecretKey& msk, const MasterPublicKey& mpk, std::string_view identity) {
  if (identity.empty()) throw ValidationError("identity must be nonempty");
  require_pairing(*mpk.group);
  return {std::string(identity), mpk.group->multiply(h1(mpk, identity), msk.s)};
}

bool verify_key(const MasterPublicKey& mpk, const IdentityPrivateKey& key) {
  if (key.identity.empty()) return false;
  const auto& g = *mpk.group;
  return g.pair(key.d, mpk.P) == g.pair(h1(mpk, key.identity), mpk.P_pub);
}

Ciphertext encrypt(const MasterPublicKey& mpk, std::string_view identity, ByteView message, RandomSource& rng) {
  if (identity.empty()) throw ValidationError("identity must be nonempty");
  if (message.size() * 8 != mpk.message_bits)
    throw ValidationError("message must be exactly " + std::to_string(mpk.message_bits) + " bits");
  const auto& g = *mpk.group;
  require_pairing(g);
  const Scalar r = g.random_scalar(rng);
  const TargetElement g_id = g.pair(h1(mpk, identity), mpk.P_pub);
  return {g.multiply(mpk.P, r), xor_bytes(message, h2(g.power(g_id, r), mpk.message_bits))};
}

Bytes decrypt(const MasterPublicKey& mpk, const IdentityPrivateKey& key, const Ciphertext& c) {
  const auto& g = *mpk.group;
  require_pairing(g);
  if (c.V.size() * 8 != mpk.message_bits) throw DecodeError("ciphertext V has the wrong length");
  const GroupElement U = g.decode_group(c.U.bytes);
  const GroupElement d = g.decode_group(key.d.bytes);
  return xor_bytes(c.V, h2(g.pair(d, U), mpk.message_bits));
}

Bytes MasterPublicKey::serialize() const {
  Bytes out;
  append_lp(out, to_bytes(group->name()));
  append_u32(out, static_cast<std::uint32_t>(security));
  append_u32(out, static_cast<std::uint32_t>(message_bits));
  append_lp(out, P.bytes);
  append_lp(out, P_pub.bytes);
  return out;
}

MasterPublicKey MasterPublicKey::deserialize(ByteView bytes) {
  ByteReader in(bytes);
  MasterPublicKey mpk;
  const std::string name = to_string(in.lp());
  try {
    mpk.group = make_pairing_group(name);
  } catch (const ConfigError& e) {
    throw DecodeError(e.what());
  }
  mpk.security = static_cast<int>(in.u32());
  mpk.message_bits = in.u32();
  mpk.P = mpk.group->decode_group(in.lp());
  mpk.P_pub = mpk.group->decode_group(in.lp());
  in.expect_done();
  return mpk;
}

Bytes IdentityPrivateKey::serialize() const {
  Bytes out;
  append_lp(out, to_bytes(identity));
  append_lp(out, d.bytes);
  return out;
}

IdentityPrivateKey IdentityPrivateKey::deserialize(const MasterPublicKey& mpk, ByteView bytes) {
  ByteReader in(bytes);
  IdentityPrivateKey k;
  k.identity = to_string(in.lp());
  k.d = mpk.group->decode_group(in.lp());
  in.expect_done();
  return k;
}

Bytes Ciphertext::serialize() const {
  Bytes out;
  append_lp(out, U.bytes);
  append_lp(out, V);
  return out;
}

Ciphertext Ciphertext::deserialize(const MasterPublicKey& mpk, ByteView bytes) {
  ByteReader in(bytes);
  Ciphertext c;
  c.U = mpk.group->decode_group(in.lp());
  c.V = in.lp();
  in.expect_done();
  if (c.V.size() * 8 != mpk.message_bits) throw DecodeError("ciphertext V has the wrong length");
  return c;
}

}  // namespace clonewatch::ibe
