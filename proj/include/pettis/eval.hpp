// Exact interval integrals of basic functions, their primitives, and the
// integrability certificates.  Evaluation is level-aggregated: at each tree
// depth the dyadic intervals fully inside the integration window contribute
// one shared coefficient counted in bulk, and only the (at most two)
// boundary addresses per depth touch the carving.  Cost is therefore
// polynomial in kmax even when 2^kmax is astronomical.
#pragma once

#include "pettis/carving.hpp"
#include "pettis/enclosure.hpp"
#include "pettis/stepfun.hpp"

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pettis {

/// Sparse vector of integral components in the orthogonal key basis.
/// `aggregates[(k, j)]` counts the depth-k addresses fully inside the window
/// (all sharing the coefficient of index j); `partials` holds the explicit
/// boundary components.  The two parts never overlap.
struct IntegralVector {
    struct Aggregate {
        BigInt count;
        SignedSquare full;  // shared component value
    };

    std::map<std::pair<int, int>, Aggregate> aggregates;
    std::map<NodeKey, SignedSquare> partials;

    bool is_zero() const;
    void scale(const Rational& c);
    IntegralVector scaled(const Rational& c) const;

    /// Componentwise sum; partial components at one key add exactly (they
    /// share the level factor), and partials that reach the full coefficient
    /// fold into the aggregate count.
    friend IntegralVector operator+(const IntegralVector& a, const IntegralVector& b);

    /// Canonical form: fold full-valued partials into aggregates, drop
    /// zeros.  Two vectors over the same function are equal iff their
    /// canonical forms match.
    void canonicalize();
    bool equals(const IntegralVector& other) const;
};

/// Exact squared l2 norm: sum over aggregates of count * square plus the
/// partial squares.
Rational norm_sq(const IntegralVector& v);

/// Exact integral component vector of f over [a, b] inside [0, 1].
/// Requires f.kmax <= cfg.kmax.
IntegralVector integral(const BasicFunction& f, const Rational& a, const Rational& b,
                        const CarvingConfig& cfg);

/// F(x+h) - F(x) as a component vector (h may be negative; the sign flips).
IntegralVector primitive_diff(const BasicFunction& f, const Rational& x, const Rational& h,
                              const CarvingConfig& cfg);

enum class CertificateKind { l2_sum, block_sum };

struct PettisCertificate {
    CertificateKind kind = CertificateKind::l2_sum;
    Rational partial;                       // l2: exact sum of coefficient squares up to kmax
    std::optional<Rational> tail_bound;     // analytic bound on the truncated tail
    RationalEnclosure block_sum;            // block kind: sum of block-root enclosures
    std::string verdict;                    // "integrable-at-truncation" | "divergent"
};

/// l2 criterion: exact truncated coefficient-square sum with an analytic
/// tail bound where the scheme provides one.
PettisCertificate pettis_check(const BasicFunction& f);

/// Block criterion: enclosure of the sum over blocks of
/// sqrt(sum of block coefficient squares); blocks here are single levels.
PettisCertificate pettis_check_blocks(const BasicFunction& f, int bits);

struct BochnerReport {
    /// partial_sums[K] encloses S_K = sum_{k<=K} 2^(k/2)/(k+1) * level l1 weight.
    std::vector<RationalEnclosure> partial_sums;
    Rational threshold;
    std::optional<int> diverged_at;  // first K with lower bound above threshold
};

/// Divergence certificate for the Bochner criterion: the norm-integral
/// partial sums grow like 2^(k/2)/(k+1); crossing the caller's threshold
/// witnesses non-Bochner-integrability at truncation scale.
BochnerReport bochner_check(const BasicFunction& f, const Rational& threshold, int bits = 96);

/// Exact sum_{k=a}^{b} 1/(k+1)^2 (zero when a > b).
Rational inv_square_sum(int a, int b);

/// Explicit per-key components of the integral over [a, b]: the exact
/// counterpart of `integral` with every full address enumerated.  Only for
/// small depths; throws once more than `cap` components would materialize.
std::vector<std::pair<NodeKey, SignedSquare>> materialize_components(
    const BasicFunction& f, const Rational& a, const Rational& b, const CarvingConfig& cfg,
    size_t cap = 1u << 20);

}  // namespace pettis
