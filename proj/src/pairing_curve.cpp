#include "clonewatch/pairing.hpp"

#include "gmp_bytes.hpp"

namespace clonewatch::ibe {
namespace {

using detail::from_be;
using detail::to_be;

struct Point {
  mpz_class x, y;
  bool infinity = true;
};

/// a + b*i with i^2 = -1.
struct Fp2 {
  mpz_class a, b;
};

class CurveGroup final : public PairingGroup {
 public:
  CurveGroup()
      : p_(detail::hex("8335bcee653523fbfbe2b9aa6a42f93bb9ecb721ba5d0ae611b2bab815887484"
                       "d1265a3a2cacbf5b6d636786d629d168946ea42afbdcf2ce539f84f988cc23e3")),
        q_(detail::hex("a9f7e03c83c9e5db8f89697fba6dd33e22266a53")),
        h_(detail::hex("c59fa34c67b05aa896128226808fd7658bc914cad80996e8b1621b3e76c31ffd"
                       "33ad9e8a95c8e496a3af380c")),
        fw_(detail::byte_width(p_)),
        sqrt_exp_((p_ + 1) / 4) {
    generator_ = hash_point("clonewatch-generator");
  }

  std::string name() const override { return "ss512"; }
  std::pair<int, int> security_range() const override { return {64, 80}; }
  int default_security() const override { return 80; }
  Bytes order() const override { return to_be(q_, detail::byte_width(q_)); }
  GroupElement generator() const override { return encode(generator_); }
  GroupElement identity() const override { return encode(Point{}); }

  GroupElement add(const GroupElement& a, const GroupElement& b) const override {
    return encode(padd(decode(a.bytes), decode(b.bytes)));
  }
  GroupElement multiply(const GroupElement& a, const Scalar& k) const override {
    return encode(pmul(decode(a.bytes), from_be(k.bytes) % q_));
  }
  TargetElement pair(const GroupElement& a, const GroupElement& b) const override {
    return encode(tate(decode(a.bytes), decode(b.bytes)));
  }
  TargetElement power(const TargetElement& a, const Scalar& k) const override {
    return encode(fpow(decode_target(a), from_be(k.bytes)));
  }
  TargetElement target_multiply(const TargetElement& a, const TargetElement& b) const override {
    return encode(fmul(decode_target(a), decode_target(b)));
  }
  TargetElement target_one() const override { return encode(Fp2{1, 0}); }

  GroupElement hash_to_group(std::string_view text) const override {
    return encode(hash_point("clonewatch-h1|" + std::string(text)));
  }

  GroupElement decode_group(ByteView bytes) const override { return encode(decode(bytes)); }

 private:
  // Encoding: 0x00 for the point at infinity, else 0x04 || x || y.
  GroupElement encode(const Point& pt) const {
    if (pt.infinity) return GroupElement{Bytes{0x00}};
    Bytes out{0x04};
    const Bytes x = to_be(pt.x, fw_), y = to_be(pt.y, fw_);
    out.insert(out.end(), x.begin(), x.end());
    out.insert(out.end(), y.begin(), y.end());
    return GroupElement{std::move(out)};
  }

  Point decode(ByteView b) const {
    if (b.size() == 1 && b[0] == 0x00) return Point{};
    if (b.size() != 1 + 2 * fw_ || b[0] != 0x04) throw DecodeError("malformed curve point encoding");
    Point pt{from_be(b.subspan(1, fw_)), from_be(b.subspan(1 + fw_, fw_)), false};
    if (pt.x >= p_ || pt.y >= p_) throw DecodeError("curve point coordinate out of range");
    if (!on_curve(pt)) throw DecodeError("point is not on the curve");
    if (!pmul(pt, q_).infinity) throw DecodeError("point is outside the prime-order subgroup");
    return pt;
  }

  TargetElement encode(const Fp2& v) const {
    Bytes out = to_be(v.a, fw_);
    const Bytes b = to_be(v.b, fw_);
    out.insert(out.end(), b.begin(), b.end());
    return TargetElement{std::move(out)};
  }

  Fp2 decode_target(const TargetElement& t) const {
    if (t.bytes.size() != 2 * fw_) throw DecodeError("malformed target element");
    const ByteView v(t.bytes);
    return {from_be(v.subspan(0, fw_)) % p_, from_be(v.subspan(fw_)) % p_};
  }

  mpz_class mod(const mpz_class& v) const {
    mpz_class r = v % p_;
    if (r < 0) r += p_;
    return r;
  }
  mpz_class inv(const mpz_class& v) const {
    mpz_class r;
    if (mpz_invert(r.get_mpz_t(), v.get_mpz_t(), p_.get_mpz_t()) == 0) throw Error("field element not invertible");
    return r;
  }

  bool on_curve(const Point& pt) const {
    return pt.infinity || mod(pt.y * pt.y - pt.x * pt.x * pt.x - pt.x) == 0;
  }

  Point padd(const Point& a, const Point& b) const {
    if (a.infinity) return b;
    if (b.infinity) return a;
    mpz_class lambda;
    if (a.x == b.x) {
      if (mod(a.y + b.y) == 0) return Point{};
      lambda = mod((3 * a.x * a.x + 1) * inv(mod(2 * a.y)));
    } else {
      lambda = mod((b.y - a.y) * inv(mod(b.x - a.x)));
    }
    Point r;
    r.infinity = false;
    r.x = mod(lambda * lambda - a.x - b.x);
    r.y = mod(lambda * (a.x - r.x) - a.y);
    return r;
  }

  /// Jacobian (X, Y, Z) with x = X/Z^2, y = Y/Z^3; Z == 0 is infinity.
  struct Jacobian {
    mpz_class X, Y, Z;
  };

  Jacobian jdouble(const Jacobian& t) const {
    if (t.Z == 0 || t.Y == 0) return {1, 1, 0};
    const mpz_class xx = mod(t.X * t.X), yy = mod(t.Y * t.Y), yyyy = mod(yy * yy), zz = mod(t.Z * t.Z);
    const mpz_class s = mod(2 * ((t.X + yy) * (t.X + yy) - xx - yyyy));
    const mpz_class m = mod(3 * xx + zz * zz);
    Jacobian r;
    r.X = mod(m * m - 2 * s);
    r.Y = mod(m * (s - r.X) - 8 * yyyy);
    r.Z = mod((t.Y + t.Z) * (t.Y + t.Z) - yy - zz);
    return r;
  }

  /// t + a with a affine.
  Jacobian jadd(const Jacobian& t, const Point& a) const {
    if (a.infinity) return t;
    if (t.Z == 0) return {a.x, a.y, 1};
    const mpz_class z1z1 = mod(t.Z * t.Z);
    const mpz_class u2 = mod(a.x * z1z1), s2 = mod(a.y * t.Z * z1z1);
    const mpz_class h = mod(u2 - t.X), rr = mod(2 * (s2 - t.Y));
    if (h == 0) return rr == 0 ? jdouble(t) : Jacobian{1, 1, 0};
    const mpz_class hh = mod(h * h), i = 4 * hh, j = mod(h * i), v = mod(t.X * i);
    Jacobian r;
    r.X = mod(rr * rr - j - 2 * v);
    r.Y = mod(rr * (v - r.X) - 2 * t.Y * j);
    r.Z = mod((t.Z + h) * (t.Z + h) - z1z1 - hh);
    return r;
  }

  Point affine(const Jacobian& t) const {
    if (t.Z == 0) return Point{};
    const mpz_class zi = inv(t.Z), zi2 = mod(zi * zi);
    return Point{mod(t.X * zi2), mod(t.Y * zi2 * zi), false};
  }

  Point pmul(const Point& pt, const mpz_class& k) const {
    if (k == 0 || pt.infinity) return Point{};
    Jacobian acc{1, 1, 0};
    for (long i = static_cast<long>(mpz_sizeinbase(k.get_mpz_t(), 2)) - 1; i >= 0; --i) {
      acc = jdouble(acc);
      if (mpz_tstbit(k.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) acc = jadd(acc, pt);
    }
    return affine(acc);
  }

  Point hash_point(const std::string& text) const {
    for (std::uint32_t counter = 0;; ++counter) {
      Bytes seed = to_bytes(text);
      append_u32(seed, counter);
      Bytes wide = sha256(seed);
      Bytes more = sha256(wide);
      wide.insert(wide.end(), more.begin(), more.end());
      more = sha256(more);
      wide.insert(wide.end(), more.begin(), more.end());
      const mpz_class x = from_be(wide) % p_;
      const mpz_class rhs = mod(x * x * x + x);
      if (rhs == 0 || mpz_legendre(rhs.get_mpz_t(), p_.get_mpz_t()) != 1) continue;
      mpz_class y;
      mpz_powm(y.get_mpz_t(), rhs.get_mpz_t(), sqrt_exp_.get_mpz_t(), p_.get_mpz_t());
      if (y > p_ - y) y = p_ - y;
      const Point cleared = pmul(Point{x, y, false}, h_);
      if (!cleared.infinity) return cleared;
    }
  }

  Fp2 fmul(const Fp2& u, const Fp2& v) const {
    return {mod(u.a * v.a - u.b * v.b), mod(u.a * v.b + u.b * v.a)};
  }
  Fp2 fsqr(const Fp2& u) const { return {mod((u.a + u.b) * (u.a - u.b)), mod(2 * u.a * u.b)}; }
  Fp2 finv(const Fp2& u) const {
    const mpz_class n = inv(mod(u.a * u.a + u.b * u.b));
    return {mod(u.a * n), mod(-u.b * n)};
  }
  Fp2 fpow(const Fp2& base, const mpz_class& e) const {
    Fp2 acc{1, 0};
    for (long i = static_cast<long>(mpz_sizeinbase(e.get_mpz_t(), 2)) - 1; i >= 0; --i) {
      acc = fsqr(acc);
      if (mpz_tstbit(e.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) acc = fmul(acc, base);
    }
    return acc;
  }

  /// Miller loop for f_{q,A} at psi(B) = (-xB, i*yB), with T in Jacobian
  /// coordinates. Line values are scaled by F_p factors and vertical lines
  /// are dropped; both vanish under the final exponentiation.
  Fp2 tate(const Point& a, const Point& b) const {
    if (a.infinity || b.infinity) return Fp2{1, 0};
    Fp2 f{1, 0};
    Jacobian t{a.x, a.y, 1};
    for (long i = static_cast<long>(mpz_sizeinbase(q_.get_mpz_t(), 2)) - 2; i >= 0; --i) {
      if (t.Z != 0) {
        // Tangent at T times 2*Y*Z^3: (3X^2 + Z^4)(xB Z^2 + X) - 2Y^2 + i * 2 yB Y Z^3.
        const mpz_class zz = mod(t.Z * t.Z);
        const mpz_class m = mod(3 * t.X * t.X + zz * zz);
        const Fp2 l{mod(m * (b.x * zz + t.X) - 2 * t.Y * t.Y), mod(2 * b.y * t.Y * zz * t.Z)};
        f = fmul(fsqr(f), l);
        t = jdouble(t);
      } else {
        f = fsqr(f);
      }
      if (mpz_tstbit(q_.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) {
        if (t.Z != 0) {
          // Chord through T and A times Z*H: r(xB + xA) - yA Z H + i * yB Z H.
          const mpz_class zz = mod(t.Z * t.Z);
          const mpz_class h = mod(a.x * zz - t.X);
          if (h != 0) {
            const mpz_class r = mod(a.y * zz * t.Z - t.Y);
            const mpz_class zh = mod(t.Z * h);
            f = fmul(f, Fp2{mod(r * (b.x + a.x) - a.y * zh), mod(b.y * zh)});
          }
        }
        t = jadd(t, a);
      }
    }
    // f^((p^2 - 1) / q) = (conj(f) / f)^h since p = 3 mod 4 makes Frobenius conjugation.
    const Fp2 unitary = fmul(Fp2{f.a, mod(-f.b)}, finv(f));
    return fpow(unitary, h_);
  }

  mpz_class p_, q_, h_;
  std::size_t fw_;
  mpz_class sqrt_exp_;
  Point generator_;
};

}  // namespace

std::shared_ptr<const PairingGroup> make_curve_group() {
  static const auto group = std::make_shared<const CurveGroup>();
  return group;
}

}  // namespace clonewatch::ibe
