#include "clonewatch/pairing.hpp"

#include "gmp_bytes.hpp"

namespace clonewatch::ibe {
namespace {

using detail::from_be;
using detail::to_be;

/// q = 2^40 + 15 (prime); r = 6q + 1 (prime); 64 = 2^6 has order q mod r.
class TestGroup final : public PairingGroup {
 public:
  TestGroup() : q_("1099511627791"), r_("6597069766747"), g_(64), gw_(detail::byte_width(q_)), tw_(detail::byte_width(r_)) {}

  std::string name() const override { return "test"; }
  std::pair<int, int> security_range() const override { return {16, 60}; }
  int default_security() const override { return 40; }
  Bytes order() const override { return to_be(q_, gw_); }
  GroupElement generator() const override { return enc(1); }
  GroupElement identity() const override { return enc(0); }

  GroupElement add(const GroupElement& a, const GroupElement& b) const override {
    return enc((dec(a) + dec(b)) % q_);
  }
  GroupElement multiply(const GroupElement& a, const Scalar& k) const override {
    return enc((dec(a) * from_be(k.bytes)) % q_);
  }
  TargetElement pair(const GroupElement& a, const GroupElement& b) const override {
    const mpz_class e = (dec(a) * dec(b)) % q_;
    return tpow(g_, e);
  }
  TargetElement power(const TargetElement& a, const Scalar& k) const override {
    return tpow(tdec(a), from_be(k.bytes));
  }
  TargetElement target_multiply(const TargetElement& a, const TargetElement& b) const override {
    return TargetElement{to_be((tdec(a) * tdec(b)) % r_, tw_)};
  }
  TargetElement target_one() const override { return TargetElement{to_be(1, tw_)}; }

  GroupElement hash_to_group(std::string_view text) const override {
    const Bytes digest = sha256(to_bytes("clonewatch-h1|" + std::string(text)));
    return enc(from_be(digest) % (q_ - 1) + 1);
  }

  GroupElement decode_group(ByteView bytes) const override {
    if (bytes.size() != gw_) throw DecodeError("test group element must be " + std::to_string(gw_) + " bytes");
    if (from_be(bytes) >= q_) throw DecodeError("test group element out of range");
    return GroupElement{Bytes(bytes.begin(), bytes.end())};
  }

 private:
  GroupElement enc(const mpz_class& v) const { return GroupElement{to_be(v, gw_)}; }
  mpz_class dec(const GroupElement& e) const { return from_be(decode_group(e.bytes).bytes); }
  mpz_class tdec(const TargetElement& t) const {
    if (t.bytes.size() != tw_) throw DecodeError("malformed target element");
    return from_be(t.bytes);
  }
  TargetElement tpow(const mpz_class& base, const mpz_class& e) const {
    mpz_class out;
    mpz_powm(out.get_mpz_t(), base.get_mpz_t(), e.get_mpz_t(), r_.get_mpz_t());
    return TargetElement{to_be(out, tw_)};
  }

  mpz_class q_, r_, g_;
  std::size_t gw_, tw_;
};

}  // namespace

std::shared_ptr<const PairingGroup> make_test_group() {
  static const auto group = std::make_shared<const TestGroup>();
  return group;
}

}  // namespace clonewatch::ibe
