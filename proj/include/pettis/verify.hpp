// Property-by-property verification harness and the difference-quotient
// blow-up witness.  Every reported pass carries the machine-checked chain
// of inequalities it rests on, as exact squares where a single norm is
// involved and as enclosures where sums of distinct square roots appear.
#pragma once

#include "pettis/banach.hpp"
#include "pettis/carving.hpp"
#include "pettis/enclosure.hpp"
#include "pettis/eval.hpp"
#include "pettis/family.hpp"
#include "pettis/stepfun.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pettis {

struct LemmaParams {
    int kmax = 8;
    int pieces_per_set = 1;
    std::vector<Rational> weights;  // combination weights (default single 1)
    std::vector<Rational> slopes;   // slope family (default 1/3)
    int tau_depth_cap = 4;
    int samples = 50;
    uint64_t seed = 1;
    int precision_bits = 64;
    int max_precision_bits = 256;
    std::string backend = "l2";  // "l2" | "lp"
    double lp_p = 4.0;
    double backend_tolerance = 1e-9;
    std::vector<long> cuts;  // block schedule for the general-space checks
    int block = 1;
    double dim_factor = 4.0;
    int frame_validate = 2000;

    CarvingConfig carving() const { return CarvingConfig{kmax, pieces_per_set, nullptr}; }
    NormBackend make_backend() const;
    BasicFunction make_function() const;  // combined function of slopes/weights
};

struct LemmaStep {
    std::string name;
    std::string lhs;  // exact "p/q" or enclosure lower bound
    std::string rhs;
    std::string note;
};

struct LemmaReport {
    std::string lemma;
    std::map<std::string, std::string> params;
    bool pass = true;
    std::vector<std::string> counterexamples;
    std::vector<LemmaStep> steps;
    long ms = 0;
};

/// Known ids: 3.1-2, 3.1-3, 3.2, 3.3, 4.2, 4.3, 4.4, 4.5.
LemmaReport verify_lemma(const std::string& id, const LemmaParams& params);

/// One sampled difference quotient with its logged proof chain.
struct QuotientSample {
    Rational h;
    int depth = 0;  // depth of the witness dyadic interval inside the window
    Address tau;
    Rational quotient_sq;  // exact ||F(x+h)-F(x)||^2 / h^2
    bool pass = false;
    Rational window_norm_sq;       // ||int over [x, x+h]||^2
    Rational tau_norm_sq;          // ||int over I_tau||^2
    Rational tau_restricted_sq;    // ||int over I_tau of f|tau||^2
    RationalEnclosure lower_sq;    // (L1 - L2)^2
};

struct BlowupWitness {
    std::string mode;  // "l2" | "general"
    Rational x;
    Rational M;
    Rational scale;  // original leading weight (quotients refer to original f)
    int i0 = 0;      // tail cutoff (1-based, inclusive overlap as in the chain)
    long l = 0;      // collision horizon of the retained selectors
    int level = 0;   // chosen dyadic level j (l2) or block index k (general)
    Address tau;     // witness interval of the first sample
    Rational delta;
    std::vector<QuotientSample> samples;
    std::string verdict;  // "pass" | "fail"
    std::vector<LemmaStep> steps;
};

struct BlowupParams {
    int kmax = 20;
    int pieces_per_set = 1;
    int sample_count = 20;
    uint64_t seed = 1;
    int precision_bits = 64;
    int max_precision_bits = 256;
    // general mode:
    std::vector<long> cuts;
    std::string backend = "l2";
    double lp_p = 4.0;
    double dim_factor = 4.0;
    int frame_validate = 2000;
};

/// l2 mode: finds the tail cutoff, the collision horizon, the least
/// feasible level j and delta = 2^-j, then verifies the exact quotient
/// inequality on `sample_count` seeded dyadic offsets |h| < delta.
/// General mode: same skeleton over a block schedule; the quotient is
/// measured over the endpoints of the witness interval containing x and
/// both one-sided quotients at x are reported.
BlowupWitness blowup_witness(const std::vector<Rational>& weights,
                             const std::vector<Selector>& selectors, const Rational& x,
                             const Rational& M, const std::string& mode,
                             const BlowupParams& params);

struct QuotientRow {
    Rational x;
    Rational h;
    Rational quot_sq;       // exact
    RationalEnclosure quot; // enclosure of the quotient itself
};

/// Rows of ||F(x+h)-F(x)||/|h| data for plotting divergence as h -> 0.
std::vector<QuotientRow> quotient_table(const BasicFunction& f, const Rational& x,
                                        const std::vector<Rational>& hs, const CarvingConfig& cfg,
                                        int bits = 64);

/// (Sum_i c_i sqrt(q_i))^2 as an enclosure with exact cross terms whenever
/// the products q_i q_j are perfect squares.  c_i must be >= 0.
RationalEnclosure sqrt_sum_sq(const std::vector<std::pair<Rational, Rational>>& terms, int bits);

}  // namespace pettis
