// The almost-disjoint selector family: one selector per rational slope,
// with an exact bound past which two distinct slopes can never collide.
#pragma once

#include "pettis/rational.hpp"
#include "pettis/stepfun.hpp"

#include <string>
#include <vector>

namespace pettis {

/// Selector n_t(k) = floor(t * k) for t in (0, 1).
Selector slope_selector(const Rational& t);

/// N = ceil(1 / |s - t|): for every k >= N, floor(s k) != floor(t k).
long collision_bound(const Rational& s, const Rational& t);

struct AdPairReport {
    Rational s, t;
    long bound = 0;
    std::vector<int> collisions;   // levels k < depth with n_s(k) == n_t(k)
    bool bound_reached = false;    // depth went past the collision bound
    bool pass = true;              // no collision at or beyond the bound
};

struct AdReport {
    std::vector<AdPairReport> pairs;
    bool pass = true;
};

/// Enumerates collisions up to `depth` for every pair of distinct slopes and
/// asserts none occur at or beyond the pair's collision bound.  Pairs whose
/// bound exceeds `depth` are flagged bound_reached = false (vacuous pass).
AdReport verify_ad(const std::vector<Rational>& ts, int depth);

}  // namespace pettis
