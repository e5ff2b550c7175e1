// Exact rational scalars and the few integer helpers the rest of the
// library needs.  Everything downstream of this header is exact: values
// are canonical mpq_class rationals and comparisons are never floating.
#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace pettis {

using Rational = mpq_class;
using BigInt = mpz_class;

/// Canonical rational num/den (den != 0).
inline Rational make_rat(const BigInt& num, const BigInt& den) {
    if (den == 0) throw std::invalid_argument("make_rat: zero denominator");
    Rational r(num, den);
    r.canonicalize();
    return r;
}

inline Rational make_rat(long num, long den) {
    return make_rat(BigInt(num), BigInt(den));
}

/// 2^k as a rational, k may be negative.
inline Rational pow2(long k) {
    BigInt p = 1;
    if (k >= 0) {
        mpz_mul_2exp(p.get_mpz_t(), p.get_mpz_t(), static_cast<mp_bitcnt_t>(k));
        return Rational(p);
    }
    mpz_mul_2exp(p.get_mpz_t(), p.get_mpz_t(), static_cast<mp_bitcnt_t>(-k));
    return make_rat(BigInt(1), p);
}

inline BigInt floor_div(const BigInt& a, const BigInt& b) {
    BigInt q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

inline BigInt ceil_div(const BigInt& a, const BigInt& b) {
    BigInt q;
    mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

inline BigInt rat_floor(const Rational& r) {
    return floor_div(r.get_num(), r.get_den());
}

inline BigInt rat_ceil(const Rational& r) {
    return ceil_div(r.get_num(), r.get_den());
}

inline int sign_of(const Rational& r) { return sgn(r); }

inline Rational rat_abs(const Rational& r) { return r < 0 ? Rational(-r) : r; }

inline Rational rat_min(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational rat_max(const Rational& a, const Rational& b) { return a > b ? a : b; }

/// floor(sqrt(n)) for n >= 0.
inline BigInt isqrt(const BigInt& n) {
    if (n < 0) throw std::domain_error("isqrt: negative");
    BigInt r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

inline bool is_perfect_square(const BigInt& n) {
    return n >= 0 && mpz_perfect_square_p(n.get_mpz_t()) != 0;
}

/// sqrt(q) when it is rational (q must be >= 0), nullopt otherwise.
inline std::optional<Rational> rational_sqrt(const Rational& q) {
    if (q < 0) return std::nullopt;
    if (!is_perfect_square(q.get_num()) || !is_perfect_square(q.get_den())) return std::nullopt;
    return make_rat(isqrt(q.get_num()), isqrt(q.get_den()));
}

/// Serialized form is always "p/q" (q = 1 kept explicit for schema stability).
inline std::string rat_to_string(const Rational& r) {
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

/// Accepts "p/q", plain integers, and "2^k" / "2^-k".
inline Rational parse_rational(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("parse_rational: empty string");
    if (s.find_first_not_of("0123456789-/^") != std::string::npos)
        throw std::invalid_argument("parse_rational: bad rational '" + s + "'");
    if (s.rfind("2^", 0) == 0) {
        long k = std::stol(s.substr(2));
        return pow2(k);
    }
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(BigInt(s));
        BigInt num(s.substr(0, slash));
        BigInt den(s.substr(slash + 1));
        return make_rat(num, den);
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("parse_rational: bad rational '" + s + "'");
    }
}

inline double rat_to_double(const Rational& r) { return r.get_d(); }

}  // namespace pettis
