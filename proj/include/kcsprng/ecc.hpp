#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "kcsprng/bits.hpp"
#include "kcsprng/error.hpp"
#include "kcsprng/u256.hpp"

namespace kcsprng {

// ---------------------------------------------------------------------------
// Prime field arithmetic (Montgomery form, R = 2^256)
// ---------------------------------------------------------------------------

/// Arithmetic modulo an odd modulus p < 2^256. Values handed to the
/// `mont_*` members are in Montgomery form (x * 2^256 mod p); the plain
/// members take and return ordinary residues.
class PrimeField {
 public:
  PrimeField() = default;

  explicit PrimeField(const U256& p) : p_(p) {
    if (!p.is_odd() || p <= U256(3)) throw UsageError("field modulus must be odd and greater than 3");
    std::uint64_t inv = p.limb[0];  // Newton iteration for p^-1 mod 2^64
    for (int i = 0; i < 6; ++i) inv *= 2 - p.limb[0] * inv;
    n0_ = std::uint64_t{0} - inv;

    // 2^256 mod p, then doubled 256 more times for 2^512 mod p.
    one_ = mod(U256(0) - p, p);
    U256 r2 = one_;
    for (int i = 0; i < 256; ++i) r2 = add(r2, r2);
    r2_ = r2;
  }

  const U256& modulus() const noexcept { return p_; }

  U256 add(const U256& a, const U256& b) const noexcept {
    U256 r;
    const bool carry = add_carry(a, b, r);
    if (carry || r >= p_) r = r - p_;
    return r;
  }

  U256 sub(const U256& a, const U256& b) const noexcept {
    U256 r;
    if (sub_borrow(a, b, r)) r = r + p_;
    return r;
  }

  U256 neg(const U256& a) const noexcept { return a.is_zero() ? a : p_ - a; }

  /// Montgomery product a * b * 2^-256 mod p (CIOS).
  U256 mont_mul(const U256& a, const U256& b) const noexcept {
    std::uint64_t t[6] = {0, 0, 0, 0, 0, 0};
    for (std::size_t i = 0; i < 4; ++i) {
      u128 c = 0;
      for (std::size_t j = 0; j < 4; ++j) {
        c += static_cast<u128>(a.limb[j]) * b.limb[i] + t[j];
        t[j] = static_cast<std::uint64_t>(c);
        c >>= 64;
      }
      c += t[4];
      t[4] = static_cast<std::uint64_t>(c);
      t[5] = static_cast<std::uint64_t>(c >> 64);

      const std::uint64_t m = t[0] * n0_;
      c = static_cast<u128>(m) * p_.limb[0] + t[0];
      c >>= 64;
      for (std::size_t j = 1; j < 4; ++j) {
        c += static_cast<u128>(m) * p_.limb[j] + t[j];
        t[j - 1] = static_cast<std::uint64_t>(c);
        c >>= 64;
      }
      c += t[4];
      t[3] = static_cast<std::uint64_t>(c);
      t[4] = t[5] + static_cast<std::uint64_t>(c >> 64);
    }
    U256 r(t[3], t[2], t[1], t[0]);
    if (t[4] != 0 || r >= p_) r = r - p_;
    return r;
  }

  U256 to_mont(const U256& a) const noexcept { return mont_mul(a, r2_); }
  U256 from_mont(const U256& a) const noexcept { return mont_mul(a, U256(1)); }
  const U256& mont_one() const noexcept { return one_; }

  /// Plain product: mont_mul(aR, b) = ab.
  U256 mul(const U256& a, const U256& b) const noexcept { return mont_mul(to_mont(a), b); }

  /// Plain-domain inverse by binary extended Euclid.
  U256 inv(const U256& a) const {
    if (a.is_zero()) throw NonInvertibleError("zero has no inverse modulo p");
    U256 u = a, v = p_, x1(1), x2(0);
    while (u != U256(1) && v != U256(1)) {
      if (u.is_zero() || v.is_zero()) throw NonInvertibleError("value not invertible modulo p");
      while (!u.is_odd()) {
        u = shr1(u);
        x1 = half(x1);
      }
      while (!v.is_odd()) {
        v = shr1(v);
        x2 = half(x2);
      }
      if (u >= v) {
        u = u - v;
        x1 = sub(x1, x2);
      } else {
        v = v - u;
        x2 = sub(x2, x1);
      }
    }
    return u == U256(1) ? x1 : x2;
  }

  /// base^e mod p, plain domain.
  U256 pow(const U256& base, const U256& e) const noexcept {
    U256 acc = one_;
    const U256 b = to_mont(base);
    for (int i = e.bit_length() - 1; i >= 0; --i) {
      acc = mont_mul(acc, acc);
      if (e.bit(static_cast<std::size_t>(i))) acc = mont_mul(acc, b);
    }
    return from_mont(acc);
  }

  /// A square root of `a` if one exists (Tonelli-Shanks; direct formula when p = 3 mod 4).
  std::optional<U256> sqrt(const U256& a) const {
    if (a.is_zero()) return U256(0);
    const U256 pm1 = p_ - U256(1);
    if (pow(a, shr1(pm1)) != U256(1)) return std::nullopt;
    if ((p_.limb[0] & 3U) == 3U) return pow(a, shr1(shr1(p_)) + U256(1));

    U256 q = pm1;
    int s = 0;
    while (!q.is_odd()) {
      q = shr1(q);
      ++s;
    }
    U256 z(2);
    while (pow(z, shr1(pm1)) != pm1) z = z + U256(1);
    U256 c = pow(z, q);
    U256 x = pow(a, shr1(q) + U256(1));
    U256 t = pow(a, q);
    int m = s;
    while (t != U256(1)) {
      int i = 0;
      U256 tt = t;
      while (tt != U256(1)) {
        tt = mul(tt, tt);
        ++i;
      }
      U256 b = c;
      for (int j = 0; j < m - i - 1; ++j) b = mul(b, b);
      x = mul(x, b);
      c = mul(b, b);
      t = mul(t, c);
      m = i;
    }
    return x;
  }

  friend bool operator==(const PrimeField& a, const PrimeField& b) noexcept { return a.p_ == b.p_; }

 private:
  // x / 2 mod p
  U256 half(const U256& x) const noexcept {
    if (!x.is_odd()) return shr1(x);
    U256 s;
    const bool carry = add_carry(x, p_, s);
    return shr1(s, carry);
  }

  U256 p_{};
  U256 one_{};
  U256 r2_{};
  std::uint64_t n0_ = 0;
};

/// A residue together with its modulus.
struct FieldElement {
  U256 value;
  U256 modulus;

  FieldElement() = default;
  FieldElement(const U256& v, const U256& p) : value(v), modulus(p) {
    if (!(v < p)) throw UsageError("field element not reduced below its modulus");
  }

  friend bool operator==(const FieldElement&, const FieldElement&) = default;
};

enum class FieldOp { add, sub, mul, inv };

/// Modular add/sub/mul of two elements, or the inverse of `x` (y ignored).
inline FieldElement field_op(FieldOp kind, const FieldElement& x, const FieldElement& y = {}) {
  const PrimeField f(x.modulus);
  if (kind == FieldOp::inv) return {f.inv(x.value), x.modulus};
  if (x.modulus != y.modulus) throw UsageError("field operands have different moduli");
  switch (kind) {
    case FieldOp::add: return {f.add(x.value, y.value), x.modulus};
    case FieldOp::sub: return {f.sub(x.value, y.value), x.modulus};
    case FieldOp::mul: return {f.mul(x.value, y.value), x.modulus};
    case FieldOp::inv: break;
  }
  return {};
}

// ---------------------------------------------------------------------------
// Primality
// ---------------------------------------------------------------------------

/// Miller-Rabin with `rounds` pseudo-random bases; error below 4^-rounds for
/// composites. The bases come from a fixed-seed engine so results are repeatable.
inline bool is_probable_prime(const U256& n, int rounds = 40) {
  if (n < U256(2)) return false;
  static constexpr std::uint64_t small[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61};
  for (std::uint64_t q : small) {
    if (n == U256(q)) return true;
    if (mod(n, U256(q)).is_zero()) return false;
  }
  const PrimeField f(n);
  const U256 nm1 = n - U256(1);
  U256 d = nm1;
  int s = 0;
  while (!d.is_odd()) {
    d = shr1(d);
    ++s;
  }
  std::mt19937_64 rng(0x6b63737072696d65ULL);
  for (int round = 0; round < rounds; ++round) {
    U256 a;
    for (auto& l : a.limb) l = rng();
    a = mod(a, n - U256(3)) + U256(2);  // [2, n-2]
    U256 x = f.pow(a, d);
    if (x == U256(1) || x == nm1) continue;
    bool witness = true;
    for (int r = 1; r < s; ++r) {
      x = f.mul(x, x);
      if (x == nm1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Curves and points
// ---------------------------------------------------------------------------

/// y^2 = x^3 + ax + b over F_p with base point G and cofactor h.
struct CurveParams {
  U256 p, a, b, gx, gy;
  U256 h{1};

  friend bool operator==(const CurveParams&, const CurveParams&) = default;
};

/// Either the identity or an affine point (x, y).
struct CurvePoint {
  bool infinity = true;
  U256 x{}, y{};

  static CurvePoint identity() noexcept { return {}; }
  static CurvePoint affine(const U256& x, const U256& y) noexcept { return {false, x, y}; }
  bool is_identity() const noexcept { return infinity; }

  friend bool operator==(const CurvePoint& a, const CurvePoint& b) noexcept {
    if (a.infinity || b.infinity) return a.infinity == b.infinity;
    return a.x == b.x && a.y == b.y;
  }
};

/// Curve with its field context precomputed; use this in loops instead of the
/// free functions, which rebuild the context per call.
class EllipticCurve {
 public:
  explicit EllipticCurve(const CurveParams& c) : params_(c), f_(c.p), a_(f_.to_mont(mod(c.a, c.p))), b_(f_.to_mont(mod(c.b, c.p))) {}

  const CurveParams& params() const noexcept { return params_; }
  const PrimeField& field() const noexcept { return f_; }
  CurvePoint base_point() const noexcept { return CurvePoint::affine(params_.gx, params_.gy); }

  bool is_on_curve(const CurvePoint& P) const noexcept {
    if (P.is_identity()) return true;
    if (!(P.x < params_.p) || !(P.y < params_.p)) return false;
    return rhs(f_.to_mont(P.x)) == f_.mont_mul(f_.to_mont(P.y), f_.to_mont(P.y));
  }

  /// 4a^3 + 27b^2 mod p.
  U256 discriminant() const noexcept {
    const U256 a3 = f_.mont_mul(f_.mont_mul(a_, a_), a_);
    const U256 b2 = f_.mont_mul(b_, b_);
    const U256 four = f_.to_mont(U256(4)), tw7 = f_.to_mont(U256(27));
    return f_.from_mont(f_.add(f_.mont_mul(four, a3), f_.mont_mul(tw7, b2)));
  }

  CurvePoint negate(const CurvePoint& P) const noexcept {
    if (P.is_identity()) return P;
    return CurvePoint::affine(P.x, f_.neg(P.y));
  }

  CurvePoint add(const CurvePoint& P, const CurvePoint& Q) const {
    require_on_curve(P);
    require_on_curve(Q);
    return from_mont(add_m(to_mont(P), to_mont(Q)));
  }

  /// k * P by left-to-right double-and-add. k = 0 is rejected.
  CurvePoint mul(const U256& k, const CurvePoint& P) const {
    if (k.is_zero()) throw UsageError("scalar_mul: k must be at least 1");
    require_on_curve(P);
    const MPoint base = to_mont(P);
    MPoint acc;  // identity
    for (int i = k.bit_length() - 1; i >= 0; --i) {
      acc = add_m(acc, acc);
      if (k.bit(static_cast<std::size_t>(i))) acc = add_m(acc, base);
    }
    return from_mont(acc);
  }

  /// Some point with the given x, if x^3 + ax + b is a square.
  std::optional<CurvePoint> lift_x(const U256& x) const {
    if (!(x < params_.p)) return std::nullopt;
    const U256 y2 = f_.from_mont(rhs(f_.to_mont(x)));
    auto y = f_.sqrt(y2);
    if (!y) return std::nullopt;
    return CurvePoint::affine(x, *y);
  }

 private:
  struct MPoint {
    bool inf = true;
    U256 x{}, y{};
  };

  U256 rhs(const U256& xm) const noexcept {
    return f_.add(f_.add(f_.mont_mul(f_.mont_mul(xm, xm), xm), f_.mont_mul(a_, xm)), b_);
  }

  MPoint to_mont(const CurvePoint& P) const noexcept {
    if (P.is_identity()) return {};
    return {false, f_.to_mont(P.x), f_.to_mont(P.y)};
  }

  CurvePoint from_mont(const MPoint& P) const noexcept {
    if (P.inf) return CurvePoint::identity();
    return CurvePoint::affine(f_.from_mont(P.x), f_.from_mont(P.y));
  }

  void require_on_curve(const CurvePoint& P) const {
    if (!is_on_curve(P)) throw UsageError("point is not on the curve");
  }

  MPoint add_m(const MPoint& P, const MPoint& Q) const {
    if (P.inf) return Q;
    if (Q.inf) return P;
    U256 lambda;
    if (P.x == Q.x) {
      if (f_.add(P.y, Q.y).is_zero()) return {};  // Q = -P, including 2-torsion doubling
      // tangent: (3x^2 + a) / 2y
      const U256 x2 = f_.mont_mul(P.x, P.x);
      const U256 num = f_.add(f_.add(f_.add(x2, x2), x2), a_);
      const U256 den = f_.add(P.y, P.y);
      lambda = f_.mont_mul(num, minv(den));
    } else {
      lambda = f_.mont_mul(f_.sub(Q.y, P.y), minv(f_.sub(Q.x, P.x)));
    }
    const U256 x3 = f_.sub(f_.sub(f_.mont_mul(lambda, lambda), P.x), Q.x);
    const U256 y3 = f_.sub(f_.mont_mul(lambda, f_.sub(P.x, x3)), P.y);
    return {false, x3, y3};
  }

  // inv(aR) = a^-1 R^-1, two Montgomery lifts give a^-1 R.
  U256 minv(const U256& am) const { return f_.to_mont(f_.to_mont(f_.inv(am))); }

  CurveParams params_;
  PrimeField f_;
  U256 a_, b_;  // Montgomery form
};

inline bool is_on_curve(const CurvePoint& P, const CurveParams& c) { return EllipticCurve(c).is_on_curve(P); }

inline CurvePoint point_add(const CurvePoint& P, const CurvePoint& Q, const CurveParams& c) {
  return EllipticCurve(c).add(P, Q);
}

inline CurvePoint scalar_mul(const U256& k, const CurvePoint& P, const CurveParams& c) {
  return EllipticCurve(c).mul(k, P);
}

/// Maps a 256-bit string to a scalar in [1, p-1]: big-endian integer mod p,
/// with 0 replaced by 1.
inline U256 field_convert(const BitStream& z, const CurveParams& c) {
  U256 k = mod(U256::from_bits(z), c.p);
  if (k.is_zero()) k = U256(1);
  return k;
}

/// Big-endian 256-bit encoding of the x-coordinate.
inline BitStream x_coordinate_bits(const CurvePoint& P) {
  if (P.is_identity()) throw UsageError("the identity point has no x-coordinate");
  return P.x.to_bits();
}

}  // namespace kcsprng
