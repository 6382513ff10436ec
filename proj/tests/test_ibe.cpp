#include <doctest.h>

#include "clonewatch/aead.hpp"
#include "clonewatch/errors.hpp"
#include "clonewatch/ibe.hpp"

using namespace clonewatch;
using namespace clonewatch::ibe;

namespace {

// Replays fixed bytes so a known scalar comes out of random_scalar.
class FixedRandom final : public RandomSource {
 public:
  explicit FixedRandom(Bytes bytes) : bytes_(std::move(bytes)) {}
  void fill(std::span<std::uint8_t> out) override {
    REQUIRE(out.size() == bytes_.size());
    std::copy(bytes_.begin(), bytes_.end(), out.begin());
  }

 private:
  Bytes bytes_;
};

class NoPairing final : public PairingGroup {
 public:
  NoPairing() : inner_(make_test_group()) {}
  std::string name() const override { return "no-pairing"; }
  bool supports_pairing() const override { return false; }
  std::pair<int, int> security_range() const override { return inner_->security_range(); }
  int default_security() const override { return inner_->default_security(); }
  Bytes order() const override { return inner_->order(); }
  GroupElement generator() const override { return inner_->generator(); }
  GroupElement identity() const override { return inner_->identity(); }
  GroupElement add(const GroupElement& a, const GroupElement& b) const override { return inner_->add(a, b); }
  GroupElement multiply(const GroupElement& a, const Scalar& k) const override { return inner_->multiply(a, k); }
  TargetElement pair(const GroupElement& a, const GroupElement& b) const override { return inner_->pair(a, b); }
  TargetElement power(const TargetElement& a, const Scalar& k) const override { return inner_->power(a, k); }
  TargetElement target_multiply(const TargetElement& a, const TargetElement& b) const override {
    return inner_->target_multiply(a, b);
  }
  TargetElement target_one() const override { return inner_->target_one(); }
  GroupElement hash_to_group(std::string_view t) const override { return inner_->hash_to_group(t); }
  GroupElement decode_group(ByteView b) const override { return inner_->decode_group(b); }

 private:
  std::shared_ptr<const PairingGroup> inner_;
};

std::pair<MasterPublicKey, MasterSecretKey> fixed_master(std::uint64_t s) {
  auto group = make_test_group();
  MasterPublicKey mpk{group, group->default_security(), 256, group->generator(), {}};
  mpk.P_pub = group->multiply(mpk.P, group->scalar(s));
  return {mpk, MasterSecretKey{group->scalar(s)}};
}

Bytes message_0_to_31() {
  Bytes m(32);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<std::uint8_t>(i);
  return m;
}

}  // namespace

TEST_CASE("known answers on the test group") {
  // tests/oracles/ibe_test_group_oracle.py
  const auto [mpk, msk] = fixed_master(123456789);
  CHECK(to_hex(h1(mpk, "alice").bytes) == "00b4c7785d55");
  CHECK(to_hex(h1(mpk, "alicx").bytes) == "009e346bc1da");
  CHECK(to_hex(h1(mpk, "bob").bytes) == "00fef7922c36");
  CHECK(to_hex(extract(msk, mpk, "alice").d.bytes) == "00e5f1e180bd");
  CHECK(to_hex(extract(msk, mpk, "alicx").d.bytes) == "008f3159fe23");
  CHECK(to_hex(extract(msk, mpk, "bob").d.bytes) == "00551fa7dd9f");
  CHECK(to_hex(mpk.group->pair(mpk.P, mpk.P).bytes) == "000000000040");

  FixedRandom r(mpk.group->scalar(987654321).bytes);
  const auto c = encrypt(mpk, "bob", message_0_to_31(), r);
  CHECK(to_hex(c.U.bytes) == "00003ade68b1");
  CHECK(to_hex(c.V) == "9b67d340c63a2db5bbfbaef8f5dadcd5be48de57fc251cb7cb585df768e81bfb");
  CHECK(decrypt(mpk, extract(msk, mpk, "bob"), c) == message_0_to_31());
  CHECK(to_hex(decrypt(mpk, extract(msk, mpk, "alice"), c)) ==
        "0f1c5f79e31c31458764f6d61b1beed6983388f583038584503437047da3342c");
}

TEST_CASE("bilinearity holds for every a, b in [1, 50] on the test group") {
  const auto g = make_test_group();
  const auto P = g->generator();
  const auto base = g->pair(P, P);
  for (std::uint64_t a = 1; a <= 50; ++a) {
    const auto aP = g->multiply(P, g->scalar(a));
    for (std::uint64_t b = 1; b <= 50; ++b) {
      const auto lhs = g->pair(aP, g->multiply(P, g->scalar(b)));
      CHECK(lhs == g->power(base, g->scalar(a * b)));
    }
  }
}

TEST_CASE("curve group sanity") {
  const auto g = make_curve_group();
  const auto P = g->generator();
  CHECK(g->decode_group(P.bytes) == P);
  CHECK(g->multiply(P, g->scalar_from_bytes(g->order())) == g->identity());
  CHECK(g->add(P, g->identity()) == P);
  CHECK(g->add(P, P) == g->multiply(P, g->scalar(2)));
  const auto base = g->pair(P, P);
  CHECK_FALSE(base == g->target_one());
  for (std::uint64_t a : {2u, 3u, 17u})
    for (std::uint64_t b : {5u, 11u}) {
      const auto lhs = g->pair(g->multiply(P, g->scalar(a)), g->multiply(P, g->scalar(b)));
      CHECK(lhs == g->power(base, g->scalar(a * b)));
      CHECK(lhs == g->pair(g->multiply(P, g->scalar(a * b)), P));
    }
  const auto q = g->hash_to_group("alice");
  CHECK_FALSE(q == g->identity());
  CHECK(g->multiply(q, g->scalar_from_bytes(g->order())) == g->identity());
  Bytes junk = P.bytes;
  junk.back() ^= 1;
  CHECK_THROWS_AS(g->decode_group(junk), DecodeError);
  CHECK_THROWS_AS(g->decode_group(Bytes(5, 0)), DecodeError);
}

TEST_CASE("round trips on both backends") {
  for (const auto* name : {"test", "ss512"}) {
    SeededRandom rng(7);
    const auto group = make_pairing_group(name);
    const auto [mpk, msk] = setup(group->default_security(), group, rng);
    const int rounds = std::string_view(name) == "test" ? 200 : 10;
    for (int i = 0; i < rounds; ++i) {
      const std::string id = "user" + std::to_string(i);
      const auto key = extract(msk, mpk, id);
      CHECK(verify_key(mpk, key));
      const Bytes m = rng.bytes(32);
      const auto c = encrypt(mpk, id, m, rng);
      CHECK(decrypt(mpk, key, Ciphertext::deserialize(mpk, c.serialize())) == m);
      CHECK(decrypt(mpk, extract(msk, mpk, id + "x"), c) != m);
    }
  }
}

TEST_CASE("zero message and other widths") {
  SeededRandom rng(1);
  const auto [mpk, msk] = setup(make_test_group()->default_security(), make_test_group(), rng, 128);
  const Bytes zero(16, 0);
  const auto c = encrypt(mpk, "alice", zero, rng);
  CHECK(c.V != zero);
  CHECK(decrypt(mpk, extract(msk, mpk, "alice"), c) == zero);
  CHECK_THROWS_AS(encrypt(mpk, "alice", Bytes(32, 0), rng), ValidationError);
  CHECK_THROWS_AS(encrypt(mpk, "", zero, rng), ValidationError);
  CHECK_THROWS_AS(setup(make_test_group()->default_security(), make_test_group(), rng, 12), ValidationError);
  CHECK_THROWS_AS(setup(make_test_group()->default_security(), make_test_group(), rng, 0), ValidationError);
}

TEST_CASE("capability errors") {
  SeededRandom rng(2);
  const auto curve = make_curve_group();
  CHECK_THROWS_AS(setup(curve->security_range().second + 1, curve, rng), CapabilityError);
  CHECK_THROWS_AS(setup(curve->security_range().first - 1, curve, rng), CapabilityError);
  CHECK_THROWS_AS(setup(make_test_group()->default_security(), std::make_shared<NoPairing>(), rng), CapabilityError);
  CHECK_THROWS_AS(make_pairing_group("bn254"), ConfigError);
}

TEST_CASE("flipping a ciphertext bit flips the same plaintext bit") {
  SeededRandom rng(3);
  const auto [mpk, msk] = setup(make_test_group()->default_security(), make_test_group(), rng);
  const Bytes m = rng.bytes(32);
  auto c = encrypt(mpk, "alice", m, rng);
  c.V[5] ^= 0x10;
  const auto out = decrypt(mpk, extract(msk, mpk, "alice"), c);
  CHECK(xor_bytes(out, m) == [] {
    Bytes d(32, 0);
    d[5] = 0x10;
    return d;
  }());
  auto bad_len = c;
  bad_len.V.pop_back();
  CHECK_THROWS_AS(decrypt(mpk, extract(msk, mpk, "alice"), bad_len), DecodeError);
}

TEST_CASE("forged keys fail verification and decryption") {
  SeededRandom rng(4);
  const auto [mpk, msk] = setup(make_curve_group()->default_security(), make_curve_group(), rng);
  const auto genuine = extract(msk, mpk, "alice");
  IdentityPrivateKey forged{"alice", mpk.group->multiply(mpk.P, mpk.group->random_scalar(rng))};
  CHECK(verify_key(mpk, genuine));
  CHECK_FALSE(verify_key(mpk, forged));
  IdentityPrivateKey relabelled{"bob", genuine.d};
  CHECK_FALSE(verify_key(mpk, relabelled));
  const Bytes m = rng.bytes(32);
  const auto c = encrypt(mpk, "alice", m, rng);
  CHECK(decrypt(mpk, forged, c) != m);
  CHECK(IdentityPrivateKey::deserialize(mpk, genuine.serialize()) == genuine);
}

TEST_CASE("no serialisation carries the master secret") {
  for (const auto* name : {"test", "ss512"}) {
    SeededRandom rng(5);
    const auto group = make_pairing_group(name);
    const auto [mpk, msk] = setup(group->default_security(), group, rng);
    const auto key = extract(msk, mpk, "alice");
    const auto c = encrypt(mpk, "alice", rng.bytes(32), rng);
    std::vector<Bytes> blobs{key.serialize(), c.serialize()};
    // The toy group's P_pub is s itself.
    if (std::string_view(name) == "ss512") blobs.push_back(mpk.serialize());
    else CHECK(mpk.P_pub.bytes == msk.s.bytes);
    for (const Bytes& blob : blobs) {
      CHECK_FALSE(contains_bytes(blob, msk.s.bytes));
      CHECK(to_hex(blob).find(to_hex(msk.s.bytes)) == std::string::npos);
    }
    const auto restored = MasterPublicKey::deserialize(mpk.serialize());
    CHECK(restored.P_pub == mpk.P_pub);
    CHECK(restored.group->name() == mpk.group->name());
    CHECK(restored.message_bits == 256);
  }
}

TEST_CASE("truncated encodings are decode errors") {
  SeededRandom rng(6);
  const auto [mpk, msk] = setup(make_test_group()->default_security(), make_test_group(), rng);
  const auto blob = extract(msk, mpk, "alice").serialize();
  CHECK_THROWS_AS(IdentityPrivateKey::deserialize(mpk, ByteView(blob).first(blob.size() - 1)), DecodeError);
  CHECK_THROWS_AS(MasterPublicKey::deserialize(Bytes{0, 0, 0, 9, 1}), DecodeError);
}

TEST_CASE("aead wrap and unwrap") {
  SeededRandom rng(8);
  const Bytes key = rng.bytes(aead::kKeyBytes);
  const Bytes payload = to_bytes("private key material");
  const auto wrapped = aead::wrap(key, payload, rng);
  CHECK(wrapped.size() == payload.size() + aead::kNonceBytes + aead::kTagBytes);
  CHECK(aead::unwrap(key, wrapped) == payload);
  CHECK(aead::wrap(key, payload, rng) != wrapped);
  auto tampered = wrapped;
  tampered[aead::kNonceBytes] ^= 1;
  CHECK_THROWS_AS(aead::unwrap(key, tampered), AuthenticationError);
  CHECK_THROWS_AS(aead::unwrap(rng.bytes(aead::kKeyBytes), wrapped), AuthenticationError);
  CHECK_THROWS_AS(aead::unwrap(key, Bytes(10, 0)), DecodeError);
  CHECK(aead::unwrap(key, aead::wrap(key, Bytes{}, rng)).empty());
}

TEST_CASE("byte helpers") {
  const Bytes b{0, 1, 0xfe, 0xff, 0x42};
  CHECK(from_hex(to_hex(b)) == b);
  CHECK(base64_decode(base64_encode(b)) == b);
  CHECK(base64_encode(to_bytes("foobar")) == "Zm9vYmFy");
  CHECK_THROWS_AS(base64_decode("@@@"), DecodeError);
  CHECK(sha256_hex(to_bytes("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Bytes framed;
  append_lp(framed, b);
  append_u32(framed, 7);
  ByteReader reader(framed);
  CHECK(reader.lp() == b);
  CHECK(reader.u32() == 7);
  reader.expect_done();
  CHECK_THROWS_AS(reader.u32(), DecodeError);
}
