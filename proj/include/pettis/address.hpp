// Binary tree addresses, dyadic intervals, and the (address, level-index)
// keys that index every coefficient and carved set in the library.
#pragma once

#include "pettis/rational.hpp"

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pettis {

/// Finite 0/1 sequence; the empty address is the tree root.  Stored as a
/// byte-per-bit vector so depths beyond 63 stay representable.
class Address {
  public:
    Address() = default;
    explicit Address(std::vector<uint8_t> bits) : bits_(std::move(bits)) {
        for (uint8_t b : bits_)
            if (b > 1) throw std::invalid_argument("Address: bits must be 0/1");
    }
    Address(std::initializer_list<int> bits) {
        bits_.reserve(bits.size());
        for (int b : bits) {
            if (b != 0 && b != 1) throw std::invalid_argument("Address: bits must be 0/1");
            bits_.push_back(static_cast<uint8_t>(b));
        }
    }

    static Address root() { return Address(); }

    /// Parse a string over {0,1}; "" is the root.
    static Address from_string(const std::string& s) {
        std::vector<uint8_t> bits;
        bits.reserve(s.size());
        for (char c : s) {
            if (c != '0' && c != '1') throw std::invalid_argument("Address: bad bit char");
            bits.push_back(static_cast<uint8_t>(c - '0'));
        }
        return Address(std::move(bits));
    }

    /// Depth-k address with the given numeric value (MSB first).
    static Address from_index(int depth, const BigInt& index) {
        if (depth < 0) throw std::invalid_argument("Address: negative depth");
        if (index < 0) throw std::invalid_argument("Address: negative index");
        BigInt cap = 1;
        mpz_mul_2exp(cap.get_mpz_t(), cap.get_mpz_t(), static_cast<mp_bitcnt_t>(depth));
        if (index >= cap) throw std::invalid_argument("Address: index out of range for depth");
        std::vector<uint8_t> bits(static_cast<size_t>(depth));
        for (int i = 0; i < depth; ++i)
            bits[static_cast<size_t>(i)] =
                mpz_tstbit(index.get_mpz_t(), static_cast<mp_bitcnt_t>(depth - 1 - i)) ? 1 : 0;
        return Address(std::move(bits));
    }

    int depth() const { return static_cast<int>(bits_.size()); }
    bool empty() const { return bits_.empty(); }
    int bit(int i) const { return bits_.at(static_cast<size_t>(i)); }

    Address child(int b) const {
        if (b != 0 && b != 1) throw std::invalid_argument("Address: bits must be 0/1");
        std::vector<uint8_t> bits = bits_;
        bits.push_back(static_cast<uint8_t>(b));
        return Address(std::move(bits));
    }

    /// First i bits.
    Address prefix(int i) const {
        if (i < 0 || i > depth()) throw std::out_of_range("Address::prefix");
        return Address(std::vector<uint8_t>(bits_.begin(), bits_.begin() + i));
    }

    Address sibling() const {
        if (empty()) throw std::logic_error("Address: root has no sibling");
        std::vector<uint8_t> bits = bits_;
        bits.back() ^= 1;
        return Address(std::move(bits));
    }

    /// Numeric value of the bit string (MSB first); root -> 0.
    BigInt index() const {
        BigInt v = 0;
        for (uint8_t b : bits_) {
            mpz_mul_2exp(v.get_mpz_t(), v.get_mpz_t(), 1);
            if (b) v += 1;
        }
        return v;
    }

    std::string to_string() const {
        std::string s;
        s.reserve(bits_.size());
        for (uint8_t b : bits_) s.push_back(static_cast<char>('0' + b));
        return s;
    }

    bool operator==(const Address& o) const { return bits_ == o.bits_; }
    /// Depth-major, then lexicographic; matches enumeration order.
    std::strong_ordering operator<=>(const Address& o) const {
        if (bits_.size() != o.bits_.size()) return bits_.size() <=> o.bits_.size();
        for (size_t i = 0; i < bits_.size(); ++i)
            if (bits_[i] != o.bits_[i]) return bits_[i] <=> o.bits_[i];
        return std::strong_ordering::equal;
    }

  private:
    std::vector<uint8_t> bits_;
};

/// true iff tau is a prefix of sigma (sigma lies in the subtree [tau]).
inline bool is_extension(const Address& sigma, const Address& tau) {
    if (tau.depth() > sigma.depth()) return false;
    for (int i = 0; i < tau.depth(); ++i)
        if (sigma.bit(i) != tau.bit(i)) return false;
    return true;
}

/// Closed dyadic interval [lo, hi] with hi - lo = 2^-depth.
struct DyadicInterval {
    Rational lo;
    Rational hi;

    Rational length() const { return hi - lo; }
    bool contains(const Rational& t) const { return lo <= t && t <= hi; }
    bool operator==(const DyadicInterval& o) const = default;
};

/// I_sigma: the root maps to [0,1]; appending 0/1 takes the left/right half.
inline DyadicInterval interval_of(const Address& sigma) {
    const int d = sigma.depth();
    const Rational len = pow2(-d);
    return DyadicInterval{Rational(sigma.index()) * len, (Rational(sigma.index()) + 1) * len};
}

/// Depth-k address whose interval contains t.  Ties at interior dyadic
/// points go right (left-closed/right-open scan); t = 1 takes the last
/// interval.  This makes the map single-valued even though the closed
/// intervals overlap at endpoints.
inline Address locate(const Rational& t, int k) {
    if (t < 0 || t > 1) throw std::domain_error("locate: t outside [0,1]");
    if (k < 0) throw std::invalid_argument("locate: negative depth");
    BigInt m = rat_floor(t * pow2(k));
    BigInt cap = 1;
    mpz_mul_2exp(cap.get_mpz_t(), cap.get_mpz_t(), static_cast<mp_bitcnt_t>(k));
    if (m >= cap) m = cap - 1;  // t == 1
    return Address::from_index(k, m);
}

/// (sigma, i) with 0 <= i <= |sigma|.
struct NodeKey {
    Address sigma;
    int level_index = 0;

    NodeKey() = default;
    NodeKey(Address s, int i) : sigma(std::move(s)), level_index(i) {
        if (i < 0 || i > sigma.depth()) throw std::invalid_argument("NodeKey: index out of range");
    }

    int depth() const { return sigma.depth(); }
    bool operator==(const NodeKey& o) const = default;
    std::strong_ordering operator<=>(const NodeKey& o) const {
        if (auto c = sigma <=> o.sigma; c != std::strong_ordering::equal) return c;
        return level_index <=> o.level_index;
    }
};

/// All keys with kmin <= |sigma| <= kmax in (depth, address, index) order.
/// Count is sum over k of 2^k (k+1); callers needing large depths must use
/// the aggregated evaluation paths instead of enumeration.
inline std::vector<NodeKey> enumerate_block(int kmin, int kmax) {
    if (kmin < 0 || kmin > kmax) throw std::invalid_argument("enumerate_block: bad range");
    if (kmax > 24) throw std::invalid_argument("enumerate_block: range too large to materialize");
    std::vector<NodeKey> out;
    for (int k = kmin; k <= kmax; ++k) {
        const BigInt addresses = BigInt(1) << k;
        for (BigInt a = 0; a < addresses; ++a) {
            Address sigma = Address::from_index(k, a);
            for (int i = 0; i <= k; ++i) out.emplace_back(sigma, i);
        }
    }
    return out;
}

/// Closed form for the enumeration count: sum_{k=0}^{K} 2^k (k+1) = K 2^{K+1} + 1.
inline BigInt block_count(int kmin, int kmax) {
    if (kmin < 0 || kmin > kmax) throw std::invalid_argument("block_count: bad range");
    auto full = [](int K) -> BigInt {
        if (K < 0) return 0;
        return BigInt(K) * (BigInt(1) << (K + 1)) + 1;
    };
    return full(kmax) - full(kmin - 1);
}

}  // namespace pettis
