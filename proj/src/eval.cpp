#include "pettis/eval.hpp"

#include <cassert>
#include <stdexcept>

namespace pettis {

bool IntegralVector::is_zero() const { return norm_sq(*this) == 0; }

void IntegralVector::scale(const Rational& c) {
    if (c == 0) {
        aggregates.clear();
        partials.clear();
        return;
    }
    for (auto& [key, agg] : aggregates) agg.full = agg.full.scaled(c);
    for (auto& [key, sq] : partials) sq = sq.scaled(c);
}

IntegralVector IntegralVector::scaled(const Rational& c) const {
    IntegralVector v = *this;
    v.scale(c);
    return v;
}

IntegralVector operator+(const IntegralVector& a, const IntegralVector& b) {
    IntegralVector out = a;
    for (const auto& [key, agg] : b.aggregates) {
        auto [it, inserted] = out.aggregates.emplace(key, agg);
        if (!inserted) {
            if (!(it->second.full == agg.full))
                throw std::logic_error("IntegralVector: adding vectors of different functions");
            it->second.count += agg.count;
        }
    }
    for (const auto& [key, sq] : b.partials) {
        auto it = out.partials.find(key);
        if (it == out.partials.end()) {
            out.partials.emplace(key, sq);
        } else {
            it->second = add_commensurable(it->second, sq);
        }
    }
    out.canonicalize();
    return out;
}

void IntegralVector::canonicalize() {
    for (auto it = partials.begin(); it != partials.end();) {
        if (it->second.is_zero()) {
            it = partials.erase(it);
            continue;
        }
        auto agg = aggregates.find({it->first.depth(), it->first.level_index});
        if (agg != aggregates.end() && it->second == agg->second.full) {
            agg->second.count += 1;
            it = partials.erase(it);
            continue;
        }
        ++it;
    }
    std::erase_if(aggregates,
                  [](const auto& kv) { return kv.second.count == 0 || kv.second.full.is_zero(); });
}

bool IntegralVector::equals(const IntegralVector& other) const {
    IntegralVector u = *this, v = other;
    u.canonicalize();
    v.canonicalize();
    if (u.partials != v.partials) return false;
    if (u.aggregates.size() != v.aggregates.size()) return false;
    for (auto itu = u.aggregates.begin(), itv = v.aggregates.begin(); itu != u.aggregates.end();
         ++itu, ++itv) {
        if (itu->first != itv->first || itu->second.count != itv->second.count ||
            !(itu->second.full == itv->second.full))
            return false;
    }
    return true;
}

Rational norm_sq(const IntegralVector& v) {
    Rational total = 0;
    for (const auto& [key, agg] : v.aggregates) total += Rational(agg.count) * agg.full.square;
    for (const auto& [key, sq] : v.partials) total += sq.square;
    return total;
}

namespace {

// Component of one key over a window: coefficient scaled by the carved
// intersection ratio.
SignedSquare window_component(const SignedSquare& coeff, const NodeKey& key,
                              const Rational& lo, const Rational& hi, const CarvingConfig& cfg) {
    if (coeff.is_zero() || lo >= hi) return SignedSquare::zero();
    CarvedSet set = carve(key, cfg);
    Rational ratio = measure_in(set, lo, hi) / set.measure;
    return coeff.scaled(ratio);
}

}  // namespace

IntegralVector integral(const BasicFunction& f, const Rational& a, const Rational& b,
                        const CarvingConfig& cfg) {
    if (a < 0 || b > 1) throw std::domain_error("integral: window outside [0,1]");
    if (a > b) throw std::invalid_argument("integral: a > b");
    if (f.kmax > cfg.kmax) throw std::invalid_argument("integral: f.kmax exceeds cfg.kmax");

    Rational lo = a, hi = b;
    int k_lo = 0;
    if (f.restriction) {
        const DyadicInterval I = interval_of(*f.restriction);
        lo = rat_max(lo, I.lo);
        hi = rat_min(hi, I.hi);
        k_lo = f.restriction->depth();
    }
    IntegralVector v;
    if (lo >= hi) return v;

    if (f.is_explicit()) {
        const auto& coeffs = std::get<ExplicitScheme>(f.scheme).coeffs;
        for (const auto& [key, coeff] : coeffs) {
            if (f.restriction && !is_extension(key.sigma, *f.restriction)) continue;
            SignedSquare comp = window_component(coeff, key, lo, hi, cfg);
            if (!comp.is_zero()) v.partials.emplace(key, comp);
        }
        return v;
    }

    for (int k = k_lo; k <= f.kmax; ++k) {
        const auto support = level_support(f, k);
        if (support.empty()) continue;

        const Rational scale = pow2(k);
        const Rational A = lo * scale, B = hi * scale;
        const BigInt m0 = rat_floor(A);
        const BigInt m1 = rat_ceil(B) - 1;
        const bool a_on_grid = (A.get_den() == 1);
        const bool b_on_grid = (B.get_den() == 1);

        BigInt full_count;
        // (boundary address, window) pairs needing exact carved ratios
        std::vector<std::pair<BigInt, std::pair<Rational, Rational>>> partial_windows;
        const Rational cell = pow2(-k);
        if (m0 == m1) {
            if (a_on_grid && b_on_grid) {
                full_count = 1;
            } else {
                full_count = 0;
                partial_windows.push_back({m0, {lo, hi}});
            }
        } else {
            full_count = m1 - m0 - 1;
            if (a_on_grid)
                full_count += 1;
            else
                partial_windows.push_back({m0, {lo, Rational(m0 + 1) * cell}});
            if (b_on_grid)
                full_count += 1;
            else
                partial_windows.push_back({m1, {Rational(m1) * cell, hi}});
        }

        for (const auto& [j, coeff] : support) {
            if (full_count > 0)
                v.aggregates.emplace(std::make_pair(k, j),
                                     IntegralVector::Aggregate{full_count, coeff});
            else
                v.aggregates.emplace(std::make_pair(k, j),
                                     IntegralVector::Aggregate{BigInt(0), coeff});
            for (const auto& [m, window] : partial_windows) {
                NodeKey key(Address::from_index(k, m), j);
                assert(!f.restriction || is_extension(key.sigma, *f.restriction));
                SignedSquare comp = window_component(coeff, key, window.first, window.second, cfg);
                if (!comp.is_zero()) v.partials.emplace(key, comp);
            }
        }
    }
    return v;
}

IntegralVector primitive_diff(const BasicFunction& f, const Rational& x, const Rational& h,
                              const CarvingConfig& cfg) {
    const Rational y = x + h;
    if (x < 0 || x > 1 || y < 0 || y > 1)
        throw std::domain_error("primitive_diff: endpoints outside [0,1]");
    if (h >= 0) return integral(f, x, y, cfg);
    IntegralVector v = integral(f, y, x, cfg);
    v.scale(Rational(-1));
    return v;
}

namespace {

// Number of addresses of depth k inside the restriction subtree.
BigInt address_count(const BasicFunction& f, int k) {
    const int base = f.restriction ? f.restriction->depth() : 0;
    if (k < base) return 0;
    return BigInt(1) << (k - base);
}

}  // namespace

PettisCertificate pettis_check(const BasicFunction& f) {
    PettisCertificate cert;
    cert.kind = CertificateKind::l2_sum;
    cert.partial = 0;
    cert.verdict = "integrable-at-truncation";

    if (f.is_explicit()) {
        for (const auto& [key, sq] : std::get<ExplicitScheme>(f.scheme).coeffs) {
            if (f.restriction && !is_extension(key.sigma, *f.restriction)) continue;
            cert.partial += sq.square;
        }
        cert.tail_bound = Rational(0);
        return cert;
    }

    for (int k = 0; k <= f.kmax; ++k)
        cert.partial += Rational(address_count(f, k)) * level_coeff_sq_sum(f, k);

    // sum_{k > kmax} 1/(k+1)^2 < 1/(kmax+1); combined schemes scale by the
    // squared l1 weight, restrictions by 2^-|tau|.
    Rational weight(1);
    if (const auto* comb = std::get_if<CombinedScheme>(&f.scheme)) {
        Rational l1 = 0;
        for (const auto& [w, sel] : comb->terms) l1 += rat_abs(w);
        weight = l1 * l1;
    }
    if (f.restriction) weight *= pow2(-f.restriction->depth());
    cert.tail_bound = weight * make_rat(BigInt(1), BigInt(f.kmax + 1));
    return cert;
}

PettisCertificate pettis_check_blocks(const BasicFunction& f, int bits) {
    if (f.is_explicit())
        throw std::logic_error("pettis_check_blocks: requires a selector scheme");
    PettisCertificate cert;
    cert.kind = CertificateKind::block_sum;
    cert.partial = 0;
    cert.verdict = "integrable-at-truncation";
    RationalEnclosure sum = enclose_point(Rational(0));
    for (int k = 0; k <= f.kmax; ++k) {
        Rational block_sq = Rational(address_count(f, k)) * level_coeff_sq_sum(f, k);
        cert.partial += block_sq;
        sum = enclose_add(sum, sqrt_enclosure(block_sq, bits));
    }
    cert.block_sum = sum;
    return cert;
}

BochnerReport bochner_check(const BasicFunction& f, const Rational& threshold, int bits) {
    if (f.is_explicit())
        throw std::logic_error("bochner_check: requires a selector scheme");
    BochnerReport report;
    report.threshold = threshold;
    Rational rational_part = 0, sqrt2_part = 0;
    const Rational restrict_scale = f.restriction ? pow2(-f.restriction->depth()) : Rational(1);
    for (int k = 0; k <= f.kmax; ++k) {
        // per-level norm mass: #addresses * sum_j |c(k,j)|
        //   = 2^(k - base) * l1(k) / ((k+1) 2^(k/2))
        //   = restrict_scale * 2^(k/2) * l1(k) / (k+1)
        Rational coeff = restrict_scale * level_weight_l1(f, k) * make_rat(BigInt(1), BigInt(k + 1)) *
                         pow2(k / 2);
        if (k % 2 == 0)
            rational_part += coeff;
        else
            sqrt2_part += coeff;
        RationalEnclosure s = enclose_a_plus_b_sqrt2(rational_part, sqrt2_part, bits);
        if (!report.diverged_at && s.lo > threshold) report.diverged_at = k;
        report.partial_sums.push_back(std::move(s));
    }
    return report;
}

Rational inv_square_sum(int a, int b) {
    Rational total = 0;
    for (int k = a; k <= b; ++k) total += make_rat(BigInt(1), BigInt(k + 1) * BigInt(k + 1));
    return total;
}

std::vector<std::pair<NodeKey, SignedSquare>> materialize_components(
    const BasicFunction& f, const Rational& a, const Rational& b, const CarvingConfig& cfg,
    size_t cap) {
    if (a < 0 || b > 1) throw std::domain_error("materialize_components: window outside [0,1]");
    if (a > b) throw std::invalid_argument("materialize_components: a > b");
    if (f.kmax > cfg.kmax)
        throw std::invalid_argument("materialize_components: f.kmax exceeds cfg.kmax");

    Rational lo = a, hi = b;
    int k_lo = 0;
    if (f.restriction) {
        const DyadicInterval I = interval_of(*f.restriction);
        lo = rat_max(lo, I.lo);
        hi = rat_min(hi, I.hi);
        k_lo = f.restriction->depth();
    }
    std::vector<std::pair<NodeKey, SignedSquare>> out;
    if (lo >= hi) return out;

    if (f.is_explicit()) {
        for (const auto& [key, coeff] : std::get<ExplicitScheme>(f.scheme).coeffs) {
            if (f.restriction && !is_extension(key.sigma, *f.restriction)) continue;
            CarvedSet set = carve(key, cfg);
            SignedSquare comp = coeff.scaled(measure_in(set, lo, hi) / set.measure);
            if (!comp.is_zero()) out.emplace_back(key, comp);
        }
        return out;
    }

    for (int k = k_lo; k <= f.kmax; ++k) {
        const auto support = level_support(f, k);
        if (support.empty()) continue;
        const Rational scale = pow2(k);
        const BigInt m0 = rat_floor(lo * scale);
        const BigInt m1 = rat_ceil(hi * scale) - 1;
        if ((m1 - m0 + 1) * BigInt(support.size()) + BigInt(out.size()) > static_cast<long>(cap))
            throw std::invalid_argument("materialize_components: component count exceeds cap");
        const Rational cell = pow2(-k);
        for (BigInt m = m0; m <= m1; ++m) {
            const Rational w_lo = rat_max(lo, Rational(m) * cell);
            const Rational w_hi = rat_min(hi, Rational(m + 1) * cell);
            Address sigma = Address::from_index(k, m);
            for (const auto& [j, coeff] : support) {
                NodeKey key(sigma, j);
                CarvedSet set = carve(key, cfg);
                SignedSquare comp = coeff.scaled(measure_in(set, w_lo, w_hi) / set.measure);
                if (!comp.is_zero()) out.emplace_back(std::move(key), std::move(comp));
            }
        }
    }
    return out;
}

}  // namespace pettis
