#include "pettis/family.hpp"

#include <set>
#include <stdexcept>

namespace pettis {

Selector slope_selector(const Rational& t) { return Selector::slope(t); }

long collision_bound(const Rational& s, const Rational& t) {
    if (s == t) throw std::invalid_argument("collision_bound: slopes must be distinct");
    if (s <= 0 || s >= 1 || t <= 0 || t >= 1)
        throw std::domain_error("collision_bound: slopes must lie in (0,1)");
    BigInt n = rat_ceil(Rational(1) / rat_abs(s - t));
    return n.get_si();
}

AdReport verify_ad(const std::vector<Rational>& ts, int depth) {
    if (depth < 0) throw std::invalid_argument("verify_ad: negative depth");
    std::set<Rational> seen;
    for (const Rational& t : ts)
        if (!seen.insert(t).second)
            throw std::invalid_argument("verify_ad: duplicate slope " + rat_to_string(t));

    AdReport report;
    for (size_t a = 0; a < ts.size(); ++a) {
        Selector sa = slope_selector(ts[a]);
        for (size_t b = a + 1; b < ts.size(); ++b) {
            Selector sb = slope_selector(ts[b]);
            AdPairReport pr;
            pr.s = ts[a];
            pr.t = ts[b];
            pr.bound = collision_bound(ts[a], ts[b]);
            pr.bound_reached = pr.bound < depth;
            for (int k = 0; k < depth; ++k) {
                if (sa.value(k) == sb.value(k)) {
                    pr.collisions.push_back(k);
                    if (k >= pr.bound) pr.pass = false;
                }
            }
            report.pass = report.pass && pr.pass;
            report.pairs.push_back(std::move(pr));
        }
    }
    return report;
}

}  // namespace pettis
