#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>

#include "clonewatch/bytes.hpp"
#include "clonewatch/randomness.hpp"

namespace clonewatch::ibe {

/// Canonical big-endian encodings wrapped so the three kinds cannot be mixed up.
struct GroupElement {
  Bytes bytes;
  bool operator==(const GroupElement&) const = default;
};
struct TargetElement {
  Bytes bytes;
  bool operator==(const TargetElement&) const = default;
};
/// Fixed-width big-endian integer modulo the group order.
struct Scalar {
  Bytes bytes;
  bool operator==(const Scalar&) const = default;
};

/// Prime-order group G with a symmetric bilinear map e: G x G -> GT.
/// G is written additively, GT multiplicatively.
class PairingGroup {
 public:
  virtual ~PairingGroup() = default;

  virtual std::string name() const = 0;
  virtual bool supports_pairing() const { return true; }
  /// Accepted security parameters, inclusive.
  virtual std::pair<int, int> security_range() const = 0;
  virtual int default_security() const = 0;

  /// Group order q, big-endian.
  virtual Bytes order() const = 0;
  virtual GroupElement generator() const = 0;
  virtual GroupElement identity() const = 0;
  virtual GroupElement add(const GroupElement& a, const GroupElement& b) const = 0;
  virtual GroupElement multiply(const GroupElement& a, const Scalar& k) const = 0;
  virtual TargetElement pair(const GroupElement& a, const GroupElement& b) const = 0;
  virtual TargetElement power(const TargetElement& a, const Scalar& k) const = 0;
  virtual TargetElement target_multiply(const TargetElement& a, const TargetElement& b) const = 0;
  virtual TargetElement target_one() const = 0;
  /// Deterministic map from arbitrary strings onto G minus the identity.
  virtual GroupElement hash_to_group(std::string_view text) const = 0;
  /// Validates an untrusted encoding (DecodeError when not a group element).
  virtual GroupElement decode_group(ByteView bytes) const = 0;

  std::size_t scalar_width() const { return order().size(); }
  /// Uniform in [1, q-1].
  Scalar random_scalar(RandomSource& rng) const;
  Scalar scalar(std::uint64_t value) const;
  /// Big-endian integer reduced modulo q.
  Scalar scalar_from_bytes(ByteView big_endian) const;
  Scalar scalar_multiply(const Scalar& a, const Scalar& b) const;
};

/// Insecure toy pairing: G = (Z_q, +) with P = 1 and
/// e(a, b) = g^(ab mod q) in the order-q subgroup of F_r^*. Scalars are
/// readable from the encodings, which is what exhaustive tests need.
std::shared_ptr<const PairingGroup> make_test_group();

/// Type-A style supersingular curve y^2 = x^3 + x over a 512-bit prime
/// field with a 160-bit subgroup; Tate pairing with the distortion map
/// (x, y) -> (-x, iy) into F_{p^2}.
std::shared_ptr<const PairingGroup> make_curve_group();

/// "test" or "ss512"; ConfigError otherwise.
std::shared_ptr<const PairingGroup> make_pairing_group(std::string_view name);

}  // namespace clonewatch::ibe
