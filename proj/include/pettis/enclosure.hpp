// Rational enclosures for the few places where sums of distinct square
// roots force us off the exact-squares path (triangle-inequality bounds,
// block sums).  Single norms are always compared on squares instead.
#pragma once

#include "pettis/rational.hpp"

#include <stdexcept>

namespace pettis {

struct RationalEnclosure {
    Rational lo;
    Rational hi;
    int precision_bits = 0;

    bool contains(const Rational& x) const { return lo <= x && x <= hi; }
    Rational width() const { return hi - lo; }
    bool is_point() const { return lo == hi; }
};

inline RationalEnclosure enclose_point(const Rational& x) {
    return RationalEnclosure{x, x, 0};
}

inline RationalEnclosure enclose_add(const RationalEnclosure& a, const RationalEnclosure& b) {
    return RationalEnclosure{a.lo + b.lo, a.hi + b.hi,
                             a.precision_bits < b.precision_bits ? a.precision_bits : b.precision_bits};
}

inline RationalEnclosure enclose_scale(const RationalEnclosure& a, const Rational& c) {
    if (c >= 0) return RationalEnclosure{a.lo * c, a.hi * c, a.precision_bits};
    return RationalEnclosure{a.hi * c, a.lo * c, a.precision_bits};
}

/// lo^2 <= q <= hi^2 with hi - lo <= 2^-bits * max(1, hi).  Exact (lo == hi)
/// on perfect rational squares; otherwise width is exactly 1/(den * 2^bits).
inline RationalEnclosure sqrt_enclosure(const Rational& q, int bits) {
    if (q < 0) throw std::domain_error("sqrt_enclosure: negative input");
    if (bits < 0) throw std::invalid_argument("sqrt_enclosure: negative precision");
    if (auto exact = rational_sqrt(q)) return RationalEnclosure{*exact, *exact, bits};

    // sqrt(n/d) = sqrt(n*d)/d; scale by 4^bits so the integer sqrt carries
    // `bits` extra binary digits.
    const BigInt& n = q.get_num();
    const BigInt& d = q.get_den();
    BigInt scaled = n * d;
    mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), static_cast<mp_bitcnt_t>(2 * bits));
    BigInt root = isqrt(scaled);

    BigInt den_scaled = d;
    mpz_mul_2exp(den_scaled.get_mpz_t(), den_scaled.get_mpz_t(), static_cast<mp_bitcnt_t>(bits));
    RationalEnclosure e;
    e.lo = make_rat(root, den_scaled);
    e.hi = make_rat(root + 1, den_scaled);
    e.precision_bits = bits;
    return e;
}

/// Enclosure of a + b*sqrt(2); used for partial sums whose terms carry a
/// single shared irrational factor.
inline RationalEnclosure enclose_a_plus_b_sqrt2(const Rational& a, const Rational& b, int bits) {
    RationalEnclosure s2 = sqrt_enclosure(make_rat(2, 1), bits);
    RationalEnclosure bs = enclose_scale(s2, b);
    return RationalEnclosure{a + bs.lo, a + bs.hi, bits};
}

}  // namespace pettis
