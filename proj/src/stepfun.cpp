#include "pettis/stepfun.hpp"

#include <algorithm>

namespace pettis {

SignedSquare add_commensurable(const SignedSquare& a, const SignedSquare& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    // value = sign_a sqrt(qa) + sign_b sqrt(qb) = sqrt(qb) (sign_a r + sign_b)
    // with r = sqrt(qa/qb), which must be rational here.
    auto r = rational_sqrt(a.square / b.square);
    if (!r) throw std::domain_error("add_commensurable: incommensurable squares");
    Rational mix = Rational(a.sign) * *r + Rational(b.sign);
    if (mix == 0) return SignedSquare::zero();
    return SignedSquare(sign_of(mix), mix * mix * b.square);
}

Selector Selector::slope(const Rational& t) {
    if (t <= 0 || t >= 1) throw std::domain_error("Selector::slope: t must lie in (0,1)");
    Selector s;
    s.kind_ = Kind::slope;
    s.t_ = t;
    return s;
}

Selector Selector::table(std::vector<int> values) {
    Selector s;
    s.kind_ = Kind::table;
    s.table_ = std::move(values);
    return s;
}

int Selector::value(int k) const {
    if (k < 0) throw std::invalid_argument("Selector::value: negative level");
    if (kind_ == Kind::slope) {
        BigInt v = rat_floor(t_ * Rational(k));
        return static_cast<int>(v.get_si());
    }
    if (static_cast<size_t>(k) >= table_.size())
        throw std::out_of_range("Selector::value: table shorter than requested level");
    return table_[static_cast<size_t>(k)];
}

void Selector::check_through(int kmax) const {
    for (int k = 0; k <= kmax; ++k) {
        const int v = value(k);
        if (v < 0 || v > k)
            throw std::domain_error("Selector: n(" + std::to_string(k) + ") = " +
                                    std::to_string(v) + " violates 0 <= n(k) <= k");
    }
}

bool Selector::operator==(const Selector& o) const {
    if (kind_ != o.kind_) return false;
    return kind_ == Kind::slope ? t_ == o.t_ : table_ == o.table_;
}

bool Selector::operator<(const Selector& o) const {
    if (kind_ != o.kind_) return kind_ < o.kind_;
    return kind_ == Kind::slope ? t_ < o.t_ : table_ < o.table_;
}

namespace {

/// Squared level factor 1/((k+1)^2 2^k).
Rational level_factor_sq(int k) {
    return make_rat(BigInt(1), BigInt(k + 1) * BigInt(k + 1)) * pow2(-k);
}

/// Merged weights d(k, j) = sum of weights whose selector picks j at level k.
std::map<int, Rational> merged_weights(const CombinedScheme& scheme, int k) {
    std::map<int, Rational> d;
    for (const auto& [w, sel] : scheme.terms) d[sel.value(k)] += w;
    std::erase_if(d, [](const auto& kv) { return kv.second == 0; });
    return d;
}

}  // namespace

BasicFunction make_fn(const Selector& n, int kmax) {
    if (kmax < 0) throw std::invalid_argument("make_fn: negative kmax");
    n.check_through(kmax);
    return BasicFunction{kmax, FnScheme{n}, std::nullopt};
}

BasicFunction make_explicit(std::map<NodeKey, SignedSquare> coeffs, int kmax) {
    if (kmax < 0) throw std::invalid_argument("make_explicit: negative kmax");
    std::erase_if(coeffs, [](const auto& kv) { return kv.second.is_zero(); });
    for (const auto& [key, sq] : coeffs)
        if (key.depth() > kmax)
            throw std::invalid_argument("make_explicit: coefficient deeper than kmax");
    return BasicFunction{kmax, ExplicitScheme{std::move(coeffs)}, std::nullopt};
}

BasicFunction combine(const std::vector<Rational>& weights, const std::vector<Selector>& selectors,
                      int kmax) {
    if (weights.size() != selectors.size())
        throw std::invalid_argument("combine: weights/selectors length mismatch");
    if (kmax < 0) throw std::invalid_argument("combine: negative kmax");
    CombinedScheme scheme;
    for (size_t i = 0; i < weights.size(); ++i) {
        selectors[i].check_through(kmax);
        scheme.terms.emplace_back(weights[i], selectors[i]);
    }
    return BasicFunction{kmax, std::move(scheme), std::nullopt};
}

BasicFunction restrict_fn(const BasicFunction& f, const Address& tau) {
    if (tau.depth() > f.kmax) throw std::invalid_argument("restrict_fn: tau deeper than kmax");
    BasicFunction g = f;
    if (g.restriction) {
        // Nested restriction: keys must extend both roots; the deeper root
        // wins when comparable, otherwise the support is empty.
        if (is_extension(tau, *g.restriction)) {
            g.restriction = tau;
        } else if (!is_extension(*g.restriction, tau)) {
            g.scheme = ExplicitScheme{};
            g.restriction = std::nullopt;
        }
        return g;
    }
    g.restriction = tau;
    return g;
}

SignedSquare coeff_sq(const BasicFunction& f, const NodeKey& key) {
    const int k = key.depth();
    if (k > f.kmax) throw std::invalid_argument("coeff_sq: key deeper than kmax");
    if (f.restriction && !is_extension(key.sigma, *f.restriction)) return SignedSquare::zero();

    if (const auto* ex = std::get_if<ExplicitScheme>(&f.scheme)) {
        auto it = ex->coeffs.find(key);
        return it == ex->coeffs.end() ? SignedSquare::zero() : it->second;
    }
    if (const auto* fn = std::get_if<FnScheme>(&f.scheme)) {
        if (fn->selector.value(k) != key.level_index) return SignedSquare::zero();
        return SignedSquare(1, level_factor_sq(k));
    }
    const auto& combined = std::get<CombinedScheme>(f.scheme);
    auto d = merged_weights(combined, k);
    auto it = d.find(key.level_index);
    if (it == d.end()) return SignedSquare::zero();
    return SignedSquare(sign_of(it->second), it->second * it->second * level_factor_sq(k));
}

std::vector<std::pair<int, SignedSquare>> level_support(const BasicFunction& f, int k) {
    if (k > f.kmax) throw std::invalid_argument("level_support: level deeper than kmax");
    if (f.is_explicit())
        throw std::logic_error("level_support: undefined for explicit schemes");
    std::vector<std::pair<int, SignedSquare>> out;
    if (const auto* fn = std::get_if<FnScheme>(&f.scheme)) {
        out.emplace_back(fn->selector.value(k), SignedSquare(1, level_factor_sq(k)));
        return out;
    }
    for (const auto& [j, d] : merged_weights(std::get<CombinedScheme>(f.scheme), k))
        out.emplace_back(j, SignedSquare(sign_of(d), d * d * level_factor_sq(k)));
    return out;
}

Rational level_coeff_sq_sum(const BasicFunction& f, int k) {
    Rational total = 0;
    for (const auto& [j, sq] : level_support(f, k)) total += sq.square;
    return total;
}

Rational level_weight_l1(const BasicFunction& f, int k) {
    if (f.is_explicit())
        throw std::logic_error("level_weight_l1: undefined for explicit schemes");
    if (std::holds_alternative<FnScheme>(f.scheme)) return Rational(1);
    Rational total = 0;
    for (const auto& [j, d] : merged_weights(std::get<CombinedScheme>(f.scheme), k))
        total += rat_abs(d);
    return total;
}

}  // namespace pettis
