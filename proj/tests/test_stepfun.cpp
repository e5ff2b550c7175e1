#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pettis/family.hpp"
#include "pettis/prng.hpp"
#include "pettis/stepfun.hpp"

using namespace pettis;

namespace {

Selector zero_selector(int kmax) { return Selector::table(std::vector<int>(kmax + 1, 0)); }

Selector diagonal_selector(int kmax) {
    std::vector<int> v(kmax + 1);
    for (int k = 0; k <= kmax; ++k) v[k] = k;
    return Selector::table(v);
}

}  // namespace

TEST_CASE("signed squares: construction and scaling") {
    const auto v = SignedSquare::from_value(make_rat(-3, 2));
    CHECK(v.sign == -1);
    CHECK(v.square == make_rat(9, 4));
    CHECK(v.scaled(make_rat(-2, 3)) == SignedSquare::from_value(Rational(1)));
    CHECK(v.scaled(Rational(0)).is_zero());
    CHECK(SignedSquare::zero().is_zero());
    CHECK_THROWS_AS(SignedSquare(0, Rational(1)), std::invalid_argument);
    CHECK_THROWS_AS(SignedSquare(1, Rational(0)), std::invalid_argument);
    CHECK_THROWS_AS(SignedSquare(1, Rational(-1)), std::invalid_argument);
}

TEST_CASE("commensurable addition matches rational arithmetic") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const Rational a = make_rat(static_cast<long>(rng.below(17)) - 8, 1 + static_cast<long>(rng.below(6)));
        const Rational b = make_rat(static_cast<long>(rng.below(17)) - 8, 1 + static_cast<long>(rng.below(6)));
        const auto sum = add_commensurable(SignedSquare::from_value(a), SignedSquare::from_value(b));
        CHECK(sum == SignedSquare::from_value(a + b));
    }
    // shared irrational factor: (3 + 1) * sqrt(1/2)
    const SignedSquare x(1, make_rat(9, 2));  // 3/sqrt(2)
    const SignedSquare y(1, make_rat(1, 2));  // 1/sqrt(2)
    CHECK(add_commensurable(x, y) == SignedSquare(1, Rational(8)));
    // incommensurable squares are refused
    CHECK_THROWS_AS(add_commensurable(SignedSquare(1, Rational(2)), SignedSquare(1, Rational(3))),
                    std::domain_error);
}

TEST_CASE("slope selector values") {
    const Selector third = Selector::slope(make_rat(1, 3));
    const int want[] = {0, 0, 0, 1, 1, 1, 2};
    for (int k = 0; k <= 6; ++k) CHECK(third.value(k) == want[k]);
    CHECK(Selector::slope(make_rat(1, 2)).value(5) == 2);
    CHECK(Selector::slope(make_rat(7, 9)).value(0) == 0);
    CHECK_THROWS_AS(Selector::slope(Rational(0)), std::domain_error);
    CHECK_THROWS_AS(Selector::slope(Rational(1)), std::domain_error);
}

TEST_CASE("selector membership check rejects out-of-range tables") {
    CHECK_NOTHROW(diagonal_selector(8).check_through(8));
    const Selector bad = Selector::table({0, 2});  // n(1) = 2 > 1
    CHECK_THROWS_AS(bad.check_through(1), std::domain_error);
    CHECK_NOTHROW(bad.check_through(0));
    CHECK_THROWS_AS(make_fn(bad, 1), std::domain_error);
    CHECK_NOTHROW(make_fn(bad, 0));
}

TEST_CASE("selector-driven coefficients") {
    const BasicFunction f = make_fn(Selector::slope(make_rat(1, 3)), 8);
    // level 0: square 1/((0+1)^2 2^0) = 1
    CHECK(coeff_sq(f, NodeKey(Address::root(), 0)) == SignedSquare(1, Rational(1)));
    // level 3 on-selector square 1/(16 * 8)
    const Address s3 = Address::from_string("010");
    CHECK(coeff_sq(f, NodeKey(s3, 1)) == SignedSquare(1, make_rat(1, 128)));
    // off-selector keys vanish
    CHECK(coeff_sq(f, NodeKey(s3, 0)).is_zero());
    CHECK(coeff_sq(f, NodeKey(s3, 3)).is_zero());
    // level 2 on-selector square 1/(9 * 4)
    CHECK(coeff_sq(f, NodeKey(Address::from_string("11"), 0)) == SignedSquare(1, make_rat(1, 36)));
    CHECK_THROWS_AS(coeff_sq(f, NodeKey(Address::from_string("010101010"), 0)),
                    std::invalid_argument);
}

TEST_CASE("restriction zeroes coefficients off the subtree") {
    const BasicFunction f = make_fn(Selector::slope(make_rat(1, 3)), 6);
    const Address tau = Address::from_string("1");
    const BasicFunction ft = restrict_fn(f, tau);
    CHECK(coeff_sq(ft, NodeKey(Address::from_string("0"), 0)).is_zero());
    CHECK(coeff_sq(ft, NodeKey(Address::from_string("10"), 0)) ==
          coeff_sq(f, NodeKey(Address::from_string("10"), 0)));
    // root restriction is the identity
    const BasicFunction froot = restrict_fn(f, Address::root());
    for (const NodeKey& key : enumerate_block(0, 3))
        CHECK(coeff_sq(froot, key) == coeff_sq(f, key));
    // surviving keys at depth k number 2^(k-1) for a depth-1 root
    for (int k = 1; k <= 6; ++k) {
        int nonzero = 0;
        const BigInt n = BigInt(1) << k;
        for (BigInt m = 0; m < n; ++m)
            if (!coeff_sq(ft, NodeKey(Address::from_index(k, m),
                                      Selector::slope(make_rat(1, 3)).value(k)))
                     .is_zero())
                ++nonzero;
        CHECK(nonzero == (1 << (k - 1)));
    }
}

TEST_CASE("nested restriction is idempotent and respects comparability") {
    const BasicFunction f = make_fn(Selector::slope(make_rat(2, 5)), 6);
    const Address tau = Address::from_string("01");
    const BasicFunction once = restrict_fn(f, tau);
    const BasicFunction twice = restrict_fn(once, tau);
    CHECK(once.restriction == twice.restriction);
    const BasicFunction deeper = restrict_fn(once, Address::from_string("011"));
    CHECK(deeper.restriction == Address::from_string("011"));
    const BasicFunction disjoint = restrict_fn(once, Address::from_string("10"));
    for (const NodeKey& key : enumerate_block(0, 4)) CHECK(coeff_sq(disjoint, key).is_zero());
}

TEST_CASE("combination merges per-level weights") {
    const int kmax = 4;
    const std::vector<Rational> weights{Rational(1), make_rat(1, 2)};
    const std::vector<Selector> sels{zero_selector(kmax), diagonal_selector(kmax)};
    const BasicFunction f = combine(weights, sels, kmax);

    // level 0: both selectors hit 0, d(0,0) = 3/2, square (3/2)^2 * 1
    CHECK(coeff_sq(f, NodeKey(Address::root(), 0)) == SignedSquare(1, make_rat(9, 4)));
    // level 2: d(2,0) = 1, d(2,2) = 1/2, d(2,1) = 0
    const Address s2 = Address::from_string("01");
    const Rational factor2 = make_rat(1, 9 * 4);
    CHECK(coeff_sq(f, NodeKey(s2, 0)) == SignedSquare(1, factor2));
    CHECK(coeff_sq(f, NodeKey(s2, 2)) == SignedSquare(1, factor2 / 4));
    CHECK(coeff_sq(f, NodeKey(s2, 1)).is_zero());

    // full cancellation produces the zero function
    const BasicFunction zero =
        combine({Rational(1), Rational(-1)}, {zero_selector(kmax), zero_selector(kmax)}, kmax);
    for (const NodeKey& key : enumerate_block(0, kmax)) CHECK(coeff_sq(zero, key).is_zero());

    CHECK_THROWS_AS(combine({Rational(1)}, sels, kmax), std::invalid_argument);
}

TEST_CASE("negative merged weights carry their sign") {
    const int kmax = 3;
    const BasicFunction f = combine({make_rat(-2, 3)}, {zero_selector(kmax)}, kmax);
    const auto c = coeff_sq(f, NodeKey(Address::root(), 0));
    CHECK(c.sign == -1);
    CHECK(c.square == make_rat(4, 9));
}

TEST_CASE("coefficients agree across truncation depths") {
    const Selector sel = Selector::slope(make_rat(3, 7));
    const BasicFunction f8 = make_fn(sel, 8);
    const BasicFunction f12 = make_fn(sel, 12);
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = static_cast<int>(rng.below(9));
        BigInt idx = 0;
        for (int i = 0; i < d; ++i) idx = idx * 2 + static_cast<long>(rng.below(2));
        const NodeKey key(Address::from_index(d, idx), static_cast<int>(rng.below(d + 1)));
        CHECK(coeff_sq(f8, key) == coeff_sq(f12, key));
    }
}

TEST_CASE("single-term combination scales the base function") {
    const Selector sel = Selector::slope(make_rat(2, 7));
    const Rational a = make_rat(-3, 5);
    const BasicFunction scaled = combine({a}, {sel}, 6);
    const BasicFunction base = make_fn(sel, 6);
    for (const NodeKey& key : enumerate_block(0, 6)) {
        const auto lhs = coeff_sq(scaled, key);
        const auto rhs = coeff_sq(base, key).scaled(a);
        CHECK(lhs == rhs);
    }
}

TEST_CASE("distinct slopes leave a nonzero merged weight at every deep level") {
    const std::vector<Rational> ts{make_rat(1, 3), make_rat(1, 2), make_rat(2, 3)};
    std::vector<Selector> sels;
    for (const auto& t : ts) sels.push_back(slope_selector(t));
    const int kmax = 16;
    long bound = 0;
    for (size_t i = 0; i < ts.size(); ++i)
        for (size_t j = i + 1; j < ts.size(); ++j)
            bound = std::max(bound, collision_bound(ts[i], ts[j]));

    Rng rng(37);
    for (int trial = 0; trial < 8; ++trial) {
        std::vector<Rational> weights;
        for (size_t i = 0; i < ts.size(); ++i) {
            const long num = 1 + static_cast<long>(rng.below(9));
            const long den = 1 + static_cast<long>(rng.below(9));
            weights.push_back(make_rat(num, den) * (rng.below(2) ? 1 : -1));
        }
        const BasicFunction f = combine(weights, sels, kmax);
        for (long k = bound; k <= kmax; ++k) {
            bool some_nonzero = false;
            for (const auto& [j, sq] : level_support(f, static_cast<int>(k)))
                some_nonzero = some_nonzero || !sq.is_zero();
            CHECK(some_nonzero);
        }
    }
}

TEST_CASE("explicit schemes store sparse coefficients") {
    std::map<NodeKey, SignedSquare> coeffs;
    coeffs.emplace(NodeKey(Address::from_string("01"), 1), SignedSquare::from_value(make_rat(1, 3)));
    const BasicFunction f = make_explicit(coeffs, 4);
    CHECK(coeff_sq(f, NodeKey(Address::from_string("01"), 1)) ==
          SignedSquare::from_value(make_rat(1, 3)));
    CHECK(coeff_sq(f, NodeKey(Address::from_string("01"), 0)).is_zero());
    CHECK_THROWS_AS(level_support(f, 2), std::logic_error);
    std::map<NodeKey, SignedSquare> deep;
    deep.emplace(NodeKey(Address::from_string("00000"), 0), SignedSquare::from_value(Rational(1)));
    CHECK_THROWS_AS(make_explicit(deep, 4), std::invalid_argument);
}
