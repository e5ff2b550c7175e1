// General-space machinery: norm backends beyond exact l2, block schedules
// with the u_{k+1} < u_k / 3 growth condition (verified exactly on squares),
// seeded random almost-Euclidean frames validated against the two-sided
// frame inequality, and sampled basis-constant estimation.
#pragma once

#include "pettis/address.hpp"
#include "pettis/enclosure.hpp"
#include "pettis/rational.hpp"
#include "pettis/stepfun.hpp"

#include <functional>
#include <string>
#include <vector>

namespace pettis {

struct NormBackend {
    enum class Kind { l2_exact, lp, oracle };

    Kind kind = Kind::l2_exact;
    double p = 2.0;
    double tolerance = 1e-9;
    uint64_t seed = 0;
    std::function<double(const std::vector<double>&)> oracle_fn;
    double k_estimate = 1.0;           // >= 1; exact for l2, sampled otherwise
    std::string k_provenance = "exact";

    static NormBackend l2();
    static NormBackend lp_float(double p, double tolerance = 1e-9, uint64_t seed = 1);
    static NormBackend oracle(std::function<double(const std::vector<double>&)> fn,
                              double tolerance = 1e-9, uint64_t seed = 1);

    /// Ambient norm of a coordinate vector.
    double vec_norm(const std::vector<double>& v) const;

    std::string kind_name() const;
};

/// Copy of the backend with k_estimate refreshed by sampling (no-op for the
/// exact backend, whose constant is 1).
NormBackend with_estimated_K(NormBackend backend, int depth, int samples);

/// Cut points n_0 = 0 < n_1 < ... with the exact tail weights
/// u_k^2 = sum_{i=n_k}^{n_{k+1}-1} 1/(i+1)^2 per block.
struct BlockSchedule {
    std::vector<long> cuts;
    std::vector<Rational> u_sq;
    bool growth_certified = false;  // u_{k+1}^2 < u_k^2 / 9 for every pair

    int blocks() const { return static_cast<int>(cuts.size()) - 1; }
    long block_lo(int k) const { return cuts.at(static_cast<size_t>(k)); }
    long block_hi(int k) const { return cuts.at(static_cast<size_t>(k) + 1); }  // exclusive
    /// |B_k| = sum of 2^d (d+1) over the block's depth window.
    BigInt block_size(int k) const;
    /// Index of the block containing depth d, or -1 past the last cut.
    int block_of_depth(long d) const;

    /// Build from explicit cuts; verifies monotonicity and, if requested,
    /// the growth condition (throws when it fails).
    static BlockSchedule from_cuts(std::vector<long> cuts, bool enforce_growth);
};

/// Greedy construction of `count` blocks satisfying the growth condition,
/// scanning each cut forward from the previous one; fails loudly when the
/// scan cap is hit.
BlockSchedule make_schedule(int count, long scan_cap = 20000);

/// u_k as an enclosure.
RationalEnclosure schedule_u(const BlockSchedule& sched, int k, int bits);

/// Random almost-Euclidean frame for one block: one ambient-coordinate
/// vector per key of B_k, supported on [dim_offset, dim_offset + dim).
struct DvoretzkyFrame {
    int block = 0;
    long dim_offset = 0;
    long dim = 0;
    std::vector<NodeKey> keys;                 // enumeration order of B_k
    std::vector<std::vector<double>> vectors;  // keys.size() x dim
    uint64_t seed = 0;
    int resamples = 0;
    double worst_lo = 1.0, worst_hi = 1.0;     // validated ratio extremes

    int key_pos(const NodeKey& key) const;  // -1 if absent
};

/// Ambient dimension heuristic for a block of `size` vectors.
long frame_dim(const NormBackend& backend, const BigInt& size, double dim_factor);

/// Ambient offset m_k: sum of the frame dims of the earlier blocks.  (The
/// offsets are a gap-fill: only the disjoint-support property is consumed
/// downstream.)
long frame_offset(const BlockSchedule& sched, const NormBackend& backend, int k,
                  double dim_factor);

/// Draw and validate a frame for block k: i.i.d. Gaussian coordinates,
/// rescaled so the median sampled ratio ||sum lambda e|| / ||lambda||_2
/// centers in [1/2, 1], then validated on `validate_samples` mixed unit
/// weights; resamples with an incremented seed up to 5 times.
DvoretzkyFrame sample_frame(int k, const BlockSchedule& sched, const NormBackend& backend,
                            uint64_t seed, int validate_samples = 10000, double dim_factor = 4.0);

/// Sampled lower estimate of the basis constant sup ||segment|| / ||full||
/// over random coordinate vectors of the given dimension; exactly 1 for the
/// exact-l2 backend, monotone nondecreasing in `samples` for a fixed seed.
double estimate_K(const NormBackend& backend, int depth, int samples, uint64_t seed = 1);

/// Ambient norm of sum weights * e(key) under the backend.  Keys must lie in
/// the supplied frames.  Relative tolerance ~1e-12 * dimension.
double gen_norm(const std::vector<std::pair<NodeKey, double>>& weights,
                const std::vector<DvoretzkyFrame>& frames, const NormBackend& backend);

/// Exact squared norm for the exact-l2 backend (identity frame).
Rational gen_norm_sq_exact(const std::vector<std::pair<NodeKey, SignedSquare>>& weights);

}  // namespace pettis
