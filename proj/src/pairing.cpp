#include "clonewatch/pairing.hpp"

#include <openssl/rand.h>

#include "gmp_bytes.hpp"

namespace clonewatch {

void SystemRandom::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) throw Error("system randomness unavailable");
}

}  // namespace clonewatch

namespace clonewatch::ibe {

using detail::from_be;
using detail::to_be;

Scalar PairingGroup::random_scalar(RandomSource& rng) const {
  const mpz_class q = from_be(order());
  const std::size_t bits = mpz_sizeinbase(q.get_mpz_t(), 2);
  const std::size_t width = scalar_width();
  for (;;) {
    Bytes raw = rng.bytes(width);
    const std::size_t spare = width * 8 - bits;
    if (spare) raw[0] &= static_cast<std::uint8_t>(0xff >> spare);
    const mpz_class v = from_be(raw);
    if (v >= 1 && v < q) return Scalar{to_be(v, width)};
  }
}

Scalar PairingGroup::scalar(std::uint64_t value) const {
  mpz_class v;
  mpz_import(v.get_mpz_t(), 1, 1, sizeof value, 0, 0, &value);
  return Scalar{to_be(v % from_be(order()), scalar_width())};
}

Scalar PairingGroup::scalar_from_bytes(ByteView big_endian) const {
  return Scalar{to_be(from_be(big_endian) % from_be(order()), scalar_width())};
}

Scalar PairingGroup::scalar_multiply(const Scalar& a, const Scalar& b) const {
  return Scalar{to_be((from_be(a.bytes) * from_be(b.bytes)) % from_be(order()), scalar_width())};
}

std::shared_ptr<const PairingGroup> make_pairing_group(std::string_view name) {
  if (name == "test") return make_test_group();
  if (name == "ss512") return make_curve_group();
  throw ConfigError("unknown pairing backend: " + std::string(name));
}

}  // namespace clonewatch::ibe
