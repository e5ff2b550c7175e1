#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracle.hpp"
#include "pettis/carving.hpp"
#include "pettis/prng.hpp"

#include <thread>

using namespace pettis;

TEST_CASE("budget formula") {
    CHECK(budget(NodeKey(Address::root(), 0)) == make_rat(1, 16));
    CHECK(budget(NodeKey(Address::from_string("0"), 0)) == make_rat(1, 256));
    CHECK(budget(NodeKey(Address::from_string("1"), 1)) == make_rat(1, 256));
    // depth 2: 1/(3 * 2^10)
    CHECK(budget(NodeKey(Address::from_string("01"), 2)) == make_rat(1, 3072));
}

TEST_CASE("budget totals stay below 1/12") {
    CarvingConfig cfg;
    for (int kmax = 0; kmax <= 7; ++kmax) {
        cfg.kmax = kmax;
        const Rational brute = testing::brute_budget_sum(kmax, cfg);
        CHECK(brute == budget_sum_through(kmax));
        CHECK(brute < make_rat(1, 12));
    }
    for (int kmax = 8; kmax <= 20; ++kmax) CHECK(budget_sum_through(kmax) < make_rat(1, 12));
}

TEST_CASE("carve: measure equals budget and pieces respect the cap") {
    CarvingConfig cfg{0, 1, nullptr};
    const CarvedSet root = carve(NodeKey(Address::root(), 0), cfg);
    CHECK(root.measure == make_rat(1, 16));
    Rational total = 0;
    for (const auto& run : root.runs) total += run.total();
    CHECK(total == make_rat(1, 16));

    CarvingConfig cfg4{4, 1, nullptr};
    const CarvedSet deep = carve(NodeKey(Address::root(), 0), cfg4);
    const Rational cap = make_rat(1, 32);  // 2^-(4+1)
    for (const auto& run : deep.runs) CHECK(run.piece_len < cap);
}

TEST_CASE("carve is deterministic and pure") {
    CarvingConfig cfg{5, 2, nullptr};
    const NodeKey key(Address::from_string("011"), 2);
    const CarvedSet a = carve(key, cfg);
    const CarvedSet b = carve(key, cfg);
    REQUIRE(a.runs.size() == b.runs.size());
    for (size_t i = 0; i < a.runs.size(); ++i) {
        CHECK(a.runs[i].start == b.runs[i].start);
        CHECK(a.runs[i].piece_len == b.runs[i].piece_len);
        CHECK(a.runs[i].period == b.runs[i].period);
        CHECK(a.runs[i].count == b.runs[i].count);
    }
}

TEST_CASE("carve is bit-identical across threads") {
    CarvingConfig cfg{8, 2, nullptr};
    const auto keys = enumerate_block(0, 4);
    std::vector<Rational> baseline;
    for (const auto& key : keys) {
        const CarvedSet set = carve(key, cfg);
        baseline.push_back(set.runs.front().start);
        baseline.push_back(set.measure);
    }
    std::vector<std::vector<Rational>> results(4);
    std::vector<std::thread> workers;
    for (auto& out : results)
        workers.emplace_back([&keys, &cfg, &out] {
            for (const auto& key : keys) {
                const CarvedSet set = carve(key, cfg);
                out.push_back(set.runs.front().start);
                out.push_back(set.measure);
            }
        });
    for (auto& w : workers) w.join();
    for (const auto& out : results) CHECK(out == baseline);
}

TEST_CASE("intersection checks report true overlaps") {
    CarvingConfig cfg{6, 1, nullptr};
    const CarvedSet a = carve(NodeKey(Address::from_string("010"), 1), cfg);
    CHECK(sets_intersect(a, a));  // identical sets share every piece
    // a translated twin stays disjoint only while the shift clears the pieces
    CarvedSet shifted = a;
    for (auto& run : shifted.runs) run.start += a.runs.front().piece_len * 2;
    CHECK(!sets_intersect(a, shifted));
    CarvedSet nudged = a;
    for (auto& run : nudged.runs) run.start += a.runs.front().piece_len / 2;
    CHECK(sets_intersect(a, nudged));
}

TEST_CASE("lattice intersection path agrees with expansion at large counts") {
    // counts large enough that the pairwise product exceeds the brute-force
    // cutoff inside the checker, forcing the Diophantine route
    Rng rng(19);
    for (int trial = 0; trial < 120; ++trial) {
        auto random_set = [&] {
            CarvedSet s;
            s.key = NodeKey(Address::root(), 0);
            s.kmax = 2;
            PieceRun run;
            run.start = make_rat(static_cast<long>(rng.below(512)), 1 << 16);
            run.piece_len = make_rat(1 + static_cast<long>(rng.below(3)), 1 << 18);
            run.period = make_rat(2 + static_cast<long>(rng.below(6)), 1 << 13);
            run.count = BigInt(70 + static_cast<long>(rng.below(40)));
            s.runs.push_back(run);
            s.measure = run.total();
            return s;
        };
        const CarvedSet a = random_set(), b = random_set();
        auto pa = expand_pieces(a, 1 << 12), pb = expand_pieces(b, 1 << 12);
        bool brute = false;
        for (const auto& [al, ah] : pa) {
            for (const auto& [bl, bh] : pb)
                if (al <= bh && bl <= ah) {
                    brute = true;
                    break;
                }
            if (brute) break;
        }
        CAPTURE(trial);
        CHECK(sets_intersect(a, b) == brute);
    }
}

TEST_CASE("pieces stay inside the home interval") {
    CarvingConfig cfg{6, 1, nullptr};
    Rng rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        const int d = static_cast<int>(rng.below(7));
        BigInt idx = 0;
        for (int i = 0; i < d; ++i) idx = idx * 2 + static_cast<long>(rng.below(2));
        const NodeKey key(Address::from_index(d, idx), static_cast<int>(rng.below(d + 1)));
        const CarvedSet set = carve(key, cfg);
        const DyadicInterval I = interval_of(key.sigma);
        for (const auto& run : set.runs) {
            CHECK(run.start >= I.lo);
            CHECK(run.last_end() <= I.hi);
        }
    }
}

TEST_CASE("pieces_per_set raises the piece count") {
    CarvingConfig cfg{2, 5, nullptr};
    const CarvedSet set = carve(NodeKey(Address::from_string("01"), 1), cfg);
    CHECK(set.piece_count() >= 5);
    CHECK(set.measure == budget(set.key));
}

TEST_CASE("path sets are pairwise disjoint (expansion check)") {
    CarvingConfig cfg{2, 1, nullptr};
    const Address sigma = Address::from_string("01");
    std::vector<CarvedSet> sets;
    for (int a = 0; a <= 2; ++a)
        for (int i = 0; i <= a; ++i) sets.push_back(carve(NodeKey(sigma.prefix(a), i), cfg));
    CHECK(sets.size() == 6);
    CHECK(testing::pieces_pairwise_disjoint(sets));
    for (size_t x = 0; x < sets.size(); ++x)
        for (size_t y = x + 1; y < sets.size(); ++y) CHECK(!sets_intersect(sets[x], sets[y]));
}

TEST_CASE("all sets of depth <= 6 are pairwise disjoint, exhaustively") {
    CarvingConfig cfg{6, 1, nullptr};
    std::vector<CarvedSet> sets;
    for (const NodeKey& key : enumerate_block(0, 6)) sets.push_back(carve(key, cfg));
    size_t hits = 0;
    for (size_t x = 0; x < sets.size(); ++x)
        for (size_t y = x + 1; y < sets.size(); ++y)
            if (sets_intersect(sets[x], sets[y])) ++hits;
    CHECK(hits == 0);
}

TEST_CASE("sets_intersect agrees with explicit expansion on random runs") {
    Rng rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        auto random_set = [&](int kmax) {
            CarvedSet s;
            s.key = NodeKey(Address::root(), 0);
            s.kmax = kmax;
            PieceRun run;
            run.start = make_rat(static_cast<long>(rng.below(64)), 256);
            run.piece_len = make_rat(1 + static_cast<long>(rng.below(4)), 512);
            run.period = make_rat(1 + static_cast<long>(rng.below(8)), 128);
            run.count = BigInt(1 + static_cast<long>(rng.below(6)));
            if (run.count == 1) run.period = Rational(0);
            s.runs.push_back(run);
            s.measure = run.total();
            return s;
        };
        const CarvedSet a = random_set(2), b = random_set(2);
        auto pa = expand_pieces(a, 1024), pb = expand_pieces(b, 1024);
        bool brute = false;
        for (const auto& [al, ah] : pa)
            for (const auto& [bl, bh] : pb)
                if (al <= bh && bl <= ah) brute = true;
        CHECK(sets_intersect(a, b) == brute);
    }
}

TEST_CASE("measure_below clips pieces exactly") {
    const NodeKey key(Address::root(), 0);
    const auto set = CarvedSet::from_pieces(
        key, {{make_rat(1, 8), make_rat(5, 32)}, {make_rat(3, 16), make_rat(7, 32)}}, 4);
    CHECK(set.measure == make_rat(1, 16));
    CHECK(measure_below(set, Rational(0)) == 0);
    CHECK(measure_below(set, Rational(1)) == set.measure);
    CHECK(measure_below(set, make_rat(3, 16)) == make_rat(1, 32));
    CHECK(measure_below(set, make_rat(9, 64)) == make_rat(1, 64));  // halfway into piece one
    CHECK_THROWS_AS(measure_below(set, Rational(2)), std::domain_error);
}

TEST_CASE("measure_below is monotone and reaches the full measure") {
    CarvingConfig cfg{5, 3, nullptr};
    const CarvedSet set = carve(NodeKey(Address::from_string("10"), 1), cfg);
    Rng rng(23);
    Rational prev = 0;
    CHECK(measure_below(set, Rational(0)) == 0);
    for (int i = 1; i <= 64; ++i) {
        const Rational t = make_rat(i, 64);
        const Rational m = measure_below(set, t);
        CHECK(m >= prev);
        prev = m;
    }
    CHECK(measure_below(set, Rational(1)) == set.measure);
}

TEST_CASE("measure_below agrees with explicit piece expansion") {
    CarvingConfig cfg{3, 2, nullptr};
    Rng rng(29);
    for (const NodeKey& key : enumerate_block(0, 3)) {
        const CarvedSet set = carve(key, cfg);
        const auto pieces = expand_pieces(set, 1u << 16);
        for (int trial = 0; trial < 5; ++trial) {
            const Rational t = make_rat(static_cast<long>(rng.below(1025)), 1024);
            Rational expect = 0;
            for (const auto& [lo, hi] : pieces) {
                if (t <= lo) continue;
                expect += rat_min(t, hi) - lo;
            }
            CHECK(measure_below(set, t) == expect);
        }
    }
}

TEST_CASE("audit passes on honest configurations") {
    CHECK(audit_path(Address::root(), CarvingConfig{0, 1, nullptr}).pass());

    const auto report = audit_path(Address::from_string("011"), CarvingConfig{6, 1, nullptr});
    CHECK(report.pass());
    CHECK(report.free_measure >= make_rat(1, 16));
    CHECK(report.sets_checked == 1 + 2 + 3 + 4 + 4);  // path keys plus the sibling's
}

TEST_CASE("audit flags a malicious budget override") {
    CarvingConfig cfg{3, 1, nullptr};
    cfg.budget_override = [](const NodeKey& key) { return pow2(-key.depth()); };
    const auto report = audit_path(Address::from_string("01"), cfg);
    CHECK(!report.pass());
}

TEST_CASE("free measure bound holds for every address up to depth 5") {
    CarvingConfig cfg{5, 1, nullptr};
    for (int d = 0; d <= 5; ++d) {
        const BigInt n = BigInt(1) << d;
        for (BigInt m = 0; m < n; ++m) {
            const auto report = audit_path(Address::from_index(d, m), cfg);
            CHECK(report.pass());
            CHECK(report.free_measure >= report.free_bound);
        }
    }
}

TEST_CASE("carve validates inputs") {
    CarvingConfig cfg{2, 1, nullptr};
    CHECK_THROWS_AS(carve(NodeKey(Address::from_string("010"), 0), cfg), std::invalid_argument);
    CarvingConfig bad_depth{-1, 1, nullptr};
    CHECK_THROWS_AS(bad_depth.validate(), std::invalid_argument);
    CarvingConfig bad_pieces{2, 0, nullptr};
    CHECK_THROWS_AS(bad_pieces.validate(), std::invalid_argument);
}
