#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pettis/address.hpp"
#include "pettis/enclosure.hpp"
#include "pettis/prng.hpp"
#include "pettis/rational.hpp"

using namespace pettis;

TEST_CASE("rational helpers are exact and canonical") {
    CHECK(make_rat(2, 4) == make_rat(1, 2));
    CHECK(make_rat(-3, -6) == make_rat(1, 2));
    CHECK(pow2(-3) == make_rat(1, 8));
    CHECK(pow2(5) == Rational(32));
    CHECK(rat_floor(make_rat(7, 2)) == 3);
    CHECK(rat_floor(make_rat(-7, 2)) == -4);
    CHECK(rat_ceil(make_rat(7, 2)) == 4);
    CHECK(rat_ceil(make_rat(-7, 2)) == -3);
    CHECK(rat_floor(Rational(5)) == 5);
    CHECK_THROWS_AS(make_rat(1, 0), std::invalid_argument);
}

TEST_CASE("rational parsing and printing") {
    CHECK(parse_rational("1/3") == make_rat(1, 3));
    CHECK(parse_rational("-5/10") == make_rat(-1, 2));
    CHECK(parse_rational("7") == Rational(7));
    CHECK(parse_rational("2^-4") == make_rat(1, 16));
    CHECK(parse_rational("2^3") == Rational(8));
    CHECK(parse_rational("2^0") == Rational(1));
    CHECK(rat_to_string(make_rat(1, 3)) == "1/3");
    CHECK(rat_to_string(Rational(4)) == "4/1");
    CHECK_THROWS_AS(parse_rational(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("x/y"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_rational("1/ 2"), std::invalid_argument);
}

TEST_CASE("rational sqrt detects perfect squares") {
    CHECK(*rational_sqrt(make_rat(49, 36)) == make_rat(7, 6));
    CHECK(*rational_sqrt(Rational(0)) == Rational(0));
    CHECK(!rational_sqrt(Rational(2)).has_value());
    CHECK(!rational_sqrt(make_rat(1, 2)).has_value());
    CHECK(!rational_sqrt(Rational(-4)).has_value());
}

TEST_CASE("sqrt enclosures: exact on squares, tight otherwise") {
    const auto four = sqrt_enclosure(Rational(4), 30);
    CHECK(four.lo == Rational(2));
    CHECK(four.hi == Rational(2));

    const auto frac = sqrt_enclosure(make_rat(49, 36), 30);
    CHECK(frac.lo == make_rat(7, 6));
    CHECK(frac.is_point());

    const auto two = sqrt_enclosure(Rational(2), 20);
    CHECK(two.lo * two.lo <= Rational(2));
    CHECK(two.hi * two.hi >= Rational(2));
    CHECK(two.width() <= pow2(-20));
    // brackets 1.414213...
    CHECK(two.lo <= make_rat(14142136, 10000000));
    CHECK(two.hi >= make_rat(14142135, 10000000));

    // refinement is monotone
    const auto tighter = sqrt_enclosure(Rational(2), 40);
    CHECK(tighter.lo >= two.lo);
    CHECK(tighter.hi <= two.hi);

    CHECK_THROWS_AS(sqrt_enclosure(Rational(-1), 10), std::domain_error);
}

TEST_CASE("addresses: parse, index, prefix order") {
    const Address root = Address::root();
    CHECK(root.depth() == 0);
    CHECK(root.to_string().empty());

    const Address a = Address::from_string("101");
    CHECK(a.depth() == 3);
    CHECK(a.index() == 5);
    CHECK(Address::from_index(3, BigInt(5)) == a);
    CHECK(a.prefix(2) == Address::from_string("10"));
    CHECK(a.sibling() == Address::from_string("100"));
    CHECK_THROWS_AS(Address::from_string("102"), std::invalid_argument);
    CHECK_THROWS_AS(Address::from_index(2, BigInt(4)), std::invalid_argument);
}

TEST_CASE("prefix extension relation") {
    CHECK(is_extension(Address::from_string("01"), Address::from_string("0")));
    CHECK(!is_extension(Address::from_string("0"), Address::from_string("01")));
    CHECK(!is_extension(Address::from_string("101"), Address::from_string("11")));
    CHECK(is_extension(Address::from_string("101"), Address::root()));
    CHECK(is_extension(Address::root(), Address::root()));
}

TEST_CASE("dyadic intervals follow the halving recursion") {
    CHECK(interval_of(Address::root()) == DyadicInterval{Rational(0), Rational(1)});
    CHECK(interval_of(Address::from_string("0")) == DyadicInterval{Rational(0), make_rat(1, 2)});
    CHECK(interval_of(Address::from_string("101")) ==
          DyadicInterval{make_rat(5, 8), make_rat(3, 4)});
    CHECK(interval_of(Address::from_string("101")).length() == make_rat(1, 8));
}

TEST_CASE("children split the parent with disjoint interiors") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int depth = static_cast<int>(rng.below(10));
        BigInt idx = 0;
        for (int i = 0; i < depth; ++i) idx = idx * 2 + static_cast<long>(rng.below(2));
        const Address sigma = Address::from_index(depth, idx);
        const auto parent = interval_of(sigma);
        const auto left = interval_of(sigma.child(0));
        const auto right = interval_of(sigma.child(1));
        CHECK(left.lo == parent.lo);
        CHECK(left.hi == right.lo);
        CHECK(right.hi == parent.hi);
    }
}

TEST_CASE("nesting matches prefix comparability") {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const int da = static_cast<int>(rng.below(7)), db = static_cast<int>(rng.below(7));
        BigInt ia = 0, ib = 0;
        for (int i = 0; i < da; ++i) ia = ia * 2 + static_cast<long>(rng.below(2));
        for (int i = 0; i < db; ++i) ib = ib * 2 + static_cast<long>(rng.below(2));
        const Address a = Address::from_index(da, ia), b = Address::from_index(db, ib);
        const auto Ia = interval_of(a), Ib = interval_of(b);
        const bool nested = (Ia.lo <= Ib.lo && Ib.hi <= Ia.hi) || (Ib.lo <= Ia.lo && Ia.hi <= Ib.hi);
        const bool comparable = is_extension(a, b) || is_extension(b, a);
        CHECK(nested == comparable);
        if (!comparable) {
            // interiors must be disjoint
            CHECK((Ia.hi <= Ib.lo || Ib.hi <= Ia.lo));
        }
    }
}

TEST_CASE("locate honors the left-closed convention") {
    CHECK(locate(Rational(0), 3) == Address::from_string("000"));
    CHECK(locate(Rational(1), 2) == Address::from_string("11"));
    CHECK(locate(make_rat(1, 2), 2) == Address::from_string("10"));
    CHECK(locate(Rational(1), 0) == Address::root());
    CHECK(locate(make_rat(3, 4), 2) == Address::from_string("11"));
    CHECK_THROWS_AS(locate(Rational(2), 3), std::domain_error);
    CHECK_THROWS_AS(locate(Rational(-1), 3), std::domain_error);
}

TEST_CASE("locate returns a containing interval for random rationals") {
    Rng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const long den = 1 + static_cast<long>(rng.below(1000));
        const long num = static_cast<long>(rng.below(static_cast<uint64_t>(den) + 1));
        const Rational t = make_rat(num, den);
        const int k = static_cast<int>(rng.below(33));
        const auto I = interval_of(locate(t, k));
        CHECK(I.contains(t));
    }
}

TEST_CASE("block enumeration counts") {
    CHECK(enumerate_block(0, 0).size() == 1);
    CHECK(enumerate_block(0, 2).size() == 17);
    CHECK(enumerate_block(2, 2).size() == 12);
    CHECK(block_count(0, 0) == 1);
    CHECK(block_count(0, 2) == 17);
    CHECK(block_count(2, 2) == 12);
    for (int kmin = 0; kmin <= 6; ++kmin)
        for (int kmax = kmin; kmax <= 6; ++kmax)
            CHECK(BigInt(static_cast<long>(enumerate_block(kmin, kmax).size())) ==
                  block_count(kmin, kmax));
    // spot checks at the deep end of the closed-form range
    CHECK(BigInt(static_cast<long>(enumerate_block(0, 12).size())) == block_count(0, 12));
    CHECK(BigInt(static_cast<long>(enumerate_block(7, 12).size())) == block_count(7, 12));
    CHECK(BigInt(static_cast<long>(enumerate_block(12, 12).size())) == block_count(12, 12));
    CHECK(block_count(0, 12) == BigInt(12) * (BigInt(1) << 13) + 1);
    CHECK_THROWS_AS(enumerate_block(3, 2), std::invalid_argument);
}

TEST_CASE("enumeration order is depth-major, then address, then index") {
    const auto keys = enumerate_block(0, 2);
    for (size_t i = 1; i < keys.size(); ++i) CHECK(keys[i - 1] < keys[i]);
    CHECK(keys.front() == NodeKey(Address::root(), 0));
    CHECK(keys.back() == NodeKey(Address::from_string("11"), 2));
}

TEST_CASE("node keys reject out-of-range indices") {
    CHECK_THROWS_AS(NodeKey(Address::from_string("01"), 3), std::invalid_argument);
    CHECK_THROWS_AS(NodeKey(Address::root(), -1), std::invalid_argument);
    CHECK_NOTHROW(NodeKey(Address::from_string("01"), 2));
}

TEST_CASE("enclosure arithmetic keeps bounds ordered") {
    const auto a = sqrt_enclosure(Rational(2), 30);
    const auto b = sqrt_enclosure(Rational(3), 30);
    const auto sum = enclose_add(a, b);
    CHECK(sum.lo <= sum.hi);
    // sqrt(2) + sqrt(3) = 3.1462...
    CHECK(sum.lo <= make_rat(31463, 10000));
    CHECK(sum.hi >= make_rat(31462, 10000));
    const auto scaled = enclose_scale(a, Rational(-2));
    CHECK(scaled.lo <= scaled.hi);
    CHECK(scaled.hi <= make_rat(-28284, 10000));
}
