// Deterministic allocation of the pairwise-disjoint positive-measure closed
// sets A(sigma, i) inside I_sigma, at a fixed truncation depth, with exact
// measure queries.
//
// Layout: fix a grid of 2^G cells of width g = 2^-G, G = 2*kmax + 8.  A cell
// whose index has exactly d trailing one bits belongs to depth class d; the
// classes partition the grid, and the class-d cells inside I_sigma are
// shared among the indices i = 0..d by a residue split of the cell counter.
// Each claimed cell holds a centered block of equal closed pieces.  Two
// different keys therefore never claim the same cell, every piece sits
// strictly inside one cell, and the mass any key places inside a dyadic
// interval of depth k <= kmax is within one cell of its proportional share.
// That yields, for every I_tau of depth k: carved mass < 2^-k / 6, i.e.
// free measure > 2^-k / 2 with a wide margin.
//
// The whole construction is a closed-form function of the key and the
// config: no global state, no query-order dependence, trivially
// thread-safe.
#pragma once

#include "pettis/address.hpp"
#include "pettis/rational.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pettis {

struct CarvingConfig {
    int kmax = 0;
    int pieces_per_set = 1;  // lower bound; the cell split usually exceeds it
    // Test hook: replaces the budget formula (audits are expected to fail
    // when this allocates more than the free space can hold).
    std::function<Rational(const NodeKey&)> budget_override;

    void validate() const;
};

/// Grid depth G for a truncation depth.
int carving_grid_depth(int kmax);

/// Measure allocated to A(sigma, i): 2^-d * 4^-(d+2) / (d+1), d = |sigma|.
/// Depends on the depth only; chosen so all budgets of depth <= kmax sum to
/// (1/12)(1 - 4^-(kmax+1)) < 1/12.
Rational budget(const NodeKey& key, const CarvingConfig& cfg = {});

/// Exact total budget over all keys of depth <= kmax (default formula).
Rational budget_sum_through(int kmax);

/// Exact total budget of all keys whose address strictly extends a depth-k
/// address, for the default formula: 2^-k * sum_{d=k+1}^{kmax} 4^-(d+2).
Rational descendant_budget_below(int k, int kmax);

/// Arithmetic progression of `count` closed pieces [start + a*period,
/// start + a*period + piece_len], a = 0..count-1.
struct PieceRun {
    Rational start;
    Rational piece_len;
    Rational period;  // meaningful when count > 1
    BigInt count;

    Rational total() const { return Rational(count) * piece_len; }
    Rational last_end() const {
        return start + Rational(count - 1) * period + piece_len;
    }
};

struct CarvedSet {
    NodeKey key;
    std::vector<PieceRun> runs;
    Rational measure;
    int kmax = 0;

    BigInt piece_count() const {
        BigInt n = 0;
        for (const auto& r : runs) n += r.count;
        return n;
    }

    /// Build directly from explicit sorted disjoint closed pieces.
    static CarvedSet from_pieces(NodeKey key,
                                 const std::vector<std::pair<Rational, Rational>>& pieces,
                                 int kmax);
};

/// Deterministic carving of A(sigma, i); pure function of (key, cfg).
CarvedSet carve(const NodeKey& key, const CarvingConfig& cfg);

/// Exact lambda(A intersect [0, t]).
Rational measure_below(const CarvedSet& set, const Rational& t);

/// Exact lambda(A intersect [a, b]), a <= b.
Rational measure_in(const CarvedSet& set, const Rational& a, const Rational& b);

/// Materialize explicit pieces, sorted; throws if more than cap.
std::vector<std::pair<Rational, Rational>> expand_pieces(const CarvedSet& set, size_t cap);

/// Exact intersection test between two carved sets (closed pieces; sharing a
/// single endpoint counts as intersecting).
bool sets_intersect(const CarvedSet& a, const CarvedSet& b);

struct AuditViolation {
    std::string kind;    // "containment" | "measure" | "piece-cap" | "disjoint" | "free-measure" | "cell-overflow"
    std::string detail;
};

struct AuditReport {
    Address tau;
    int kmax = 0;
    std::vector<AuditViolation> violations;
    Rational free_measure;  // exact free measure of I_tau
    Rational free_bound;    // required lower bound 2^-|tau| / 2
    size_t sets_checked = 0;
    size_t pairs_checked = 0;

    bool pass() const { return violations.empty(); }
};

/// Carves every key on the prefix closure of tau plus all keys at depth
/// |tau| inside I_tau's parent, then checks containment, measure-vs-budget,
/// the piece-length cap, pairwise disjointness, and the free-measure bound
/// for I_tau.  With a budget override the free-measure descendant total
/// assumes the override depends on depth only (true for the test hooks).
AuditReport audit_path(const Address& tau, const CarvingConfig& cfg);

}  // namespace pettis
