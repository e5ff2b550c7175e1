#include "pettis/banach.hpp"

#include "pettis/eval.hpp"
#include "pettis/prng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pettis {

NormBackend NormBackend::l2() { return NormBackend{}; }

NormBackend NormBackend::lp_float(double p, double tolerance, uint64_t seed) {
    if (p < 1.0) throw std::invalid_argument("NormBackend: p must be >= 1");
    NormBackend b;
    b.kind = Kind::lp;
    b.p = p;
    b.tolerance = tolerance;
    b.seed = seed;
    b.k_provenance = "unsampled";
    return b;
}

NormBackend NormBackend::oracle(std::function<double(const std::vector<double>&)> fn,
                                double tolerance, uint64_t seed) {
    NormBackend b;
    b.kind = Kind::oracle;
    b.oracle_fn = std::move(fn);
    b.tolerance = tolerance;
    b.seed = seed;
    b.k_provenance = "unsampled";
    return b;
}

NormBackend with_estimated_K(NormBackend backend, int depth, int samples) {
    if (backend.kind == NormBackend::Kind::l2_exact) return backend;
    backend.k_estimate = estimate_K(backend, depth, samples, backend.seed);
    backend.k_provenance = "sampled-lower-bound";
    return backend;
}

double NormBackend::vec_norm(const std::vector<double>& v) const {
    switch (kind) {
        case Kind::l2_exact: {
            double s = 0;
            for (double x : v) s += x * x;
            return std::sqrt(s);
        }
        case Kind::lp: {
            double s = 0;
            for (double x : v) s += std::pow(std::fabs(x), p);
            return std::pow(s, 1.0 / p);
        }
        case Kind::oracle:
            return oracle_fn(v);
    }
    return 0;
}

std::string NormBackend::kind_name() const {
    switch (kind) {
        case Kind::l2_exact: return "l2-exact";
        case Kind::lp: return "lp";
        case Kind::oracle: return "oracle";
    }
    return "?";
}

BigInt BlockSchedule::block_size(int k) const {
    BigInt n = 0;
    for (long d = block_lo(k); d < block_hi(k); ++d) n += (BigInt(1) << d) * (d + 1);
    return n;
}

int BlockSchedule::block_of_depth(long d) const {
    for (int k = 0; k < blocks(); ++k)
        if (d >= block_lo(k) && d < block_hi(k)) return k;
    return -1;
}

BlockSchedule BlockSchedule::from_cuts(std::vector<long> cuts, bool enforce_growth) {
    if (cuts.size() < 2) throw std::invalid_argument("BlockSchedule: need at least one block");
    if (cuts.front() != 0) throw std::invalid_argument("BlockSchedule: n_0 must be 0");
    for (size_t i = 1; i < cuts.size(); ++i)
        if (cuts[i] <= cuts[i - 1])
            throw std::invalid_argument("BlockSchedule: cuts must be strictly increasing");

    BlockSchedule sched;
    sched.cuts = std::move(cuts);
    for (int k = 0; k < sched.blocks(); ++k)
        sched.u_sq.push_back(
            inv_square_sum(static_cast<int>(sched.block_lo(k)), static_cast<int>(sched.block_hi(k)) - 1));

    sched.growth_certified = true;
    for (int k = 0; k + 1 < sched.blocks(); ++k) {
        // u_{k+1} < u_k / 3 verified exactly on squares
        if (!(9 * sched.u_sq[static_cast<size_t>(k) + 1] < sched.u_sq[static_cast<size_t>(k)])) {
            sched.growth_certified = false;
            if (enforce_growth)
                throw std::invalid_argument("BlockSchedule: growth condition fails at block " +
                                            std::to_string(k));
        }
    }
    return sched;
}

BlockSchedule make_schedule(int count, long scan_cap) {
    if (count < 1) throw std::invalid_argument("make_schedule: count must be >= 1");
    std::vector<long> cuts{0};
    Rational u_prev_sq;  // u_{k-1}^2 once k >= 1
    for (int k = 0; k < count; ++k) {
        const long base = cuts.back();
        Rational t = 0;  // sum_{i=base}^{n-1} 1/(i+1)^2, scanned incrementally
        long chosen = -1;
        for (long n = base + 1; n <= scan_cap; ++n) {
            t += make_rat(BigInt(1), BigInt(n) * BigInt(n));
            if (k >= 1 && !(9 * t < u_prev_sq)) break;  // t only grows; no later n can work
            // Sustainability: the next block must be able to start (its
            // first term is 1/(n+1)^2 and its tail weight is about 1/n), so
            // require t * n >= 9 before cutting here.  The last block has no
            // successor and takes the first admissible cut.
            const bool last = (k == count - 1);
            if (last || t * Rational(n) >= 9) {
                chosen = n;
                u_prev_sq = t;
                break;
            }
        }
        if (chosen < 0)
            throw std::runtime_error("make_schedule: growth condition unreachable within scan cap");
        cuts.push_back(chosen);
    }
    return BlockSchedule::from_cuts(std::move(cuts), true);
}

RationalEnclosure schedule_u(const BlockSchedule& sched, int k, int bits) {
    return sqrt_enclosure(sched.u_sq.at(static_cast<size_t>(k)), bits);
}

int DvoretzkyFrame::key_pos(const NodeKey& key) const {
    for (size_t i = 0; i < keys.size(); ++i)
        if (keys[i] == key) return static_cast<int>(i);
    return -1;
}

long frame_dim(const NormBackend& backend, const BigInt& size, double dim_factor) {
    if (size > 1000000)
        throw std::invalid_argument("frame_dim: block too large for frame construction");
    if (backend.kind == NormBackend::Kind::l2_exact) return size.get_si();
    const double n = size.get_d();
    const double suggested = dim_factor * n * std::log(n + 1.0);
    return std::max(size.get_si(), static_cast<long>(std::ceil(suggested)));
}

long frame_offset(const BlockSchedule& sched, const NormBackend& backend, int k,
                  double dim_factor) {
    long off = 0;
    for (int j = 0; j < k; ++j) off += frame_dim(backend, sched.block_size(j), dim_factor);
    return off;
}

namespace {

std::vector<NodeKey> block_keys(const BlockSchedule& sched, int k) {
    return enumerate_block(static_cast<int>(sched.block_lo(k)),
                           static_cast<int>(sched.block_hi(k)) - 1);
}

// Ratio ||sum lambda e||_backend / ||lambda||_2 for a weight vector.
double frame_ratio(const std::vector<std::vector<double>>& vectors, long dim,
                   const std::vector<double>& lambda, const NormBackend& backend) {
    std::vector<double> y(static_cast<size_t>(dim), 0.0);
    double l2 = 0;
    for (size_t v = 0; v < vectors.size(); ++v) {
        l2 += lambda[v] * lambda[v];
        if (lambda[v] == 0.0) continue;
        const auto& vec = vectors[v];
        for (long c = 0; c < dim; ++c) y[static_cast<size_t>(c)] += lambda[v] * vec[static_cast<size_t>(c)];
    }
    if (l2 == 0) return 1.0;
    return backend.vec_norm(y) / std::sqrt(l2);
}

// Mixed validation weights: dense Gaussian, single spikes, sparse pairs.
std::vector<double> validation_lambda(size_t nvec, int round, Rng& rng) {
    std::vector<double> lambda(nvec, 0.0);
    switch (round % 3) {
        case 0:
            for (auto& x : lambda) x = rng.normal();
            break;
        case 1:
            lambda[rng.below(nvec)] = rng.real01() < 0.5 ? -1.0 : 1.0;
            break;
        default: {
            const size_t a = rng.below(nvec);
            size_t b = rng.below(nvec);
            lambda[a] += rng.normal();
            lambda[b] += rng.normal();
            break;
        }
    }
    return lambda;
}

}  // namespace

DvoretzkyFrame sample_frame(int k, const BlockSchedule& sched, const NormBackend& backend,
                            uint64_t seed, int validate_samples, double dim_factor) {
    DvoretzkyFrame frame;
    frame.block = k;
    frame.keys = block_keys(sched, k);
    const size_t nvec = frame.keys.size();
    frame.dim = frame_dim(backend, sched.block_size(k), dim_factor);
    frame.dim_offset = frame_offset(sched, backend, k, dim_factor);

    if (backend.kind == NormBackend::Kind::l2_exact) {
        // Orthonormal coordinates: the identity frame is exact.
        frame.seed = seed;
        frame.vectors.assign(nvec, std::vector<double>(static_cast<size_t>(frame.dim), 0.0));
        for (size_t v = 0; v < nvec; ++v) frame.vectors[v][v] = 1.0;
        return frame;
    }

    const int max_resamples = 5;
    for (int attempt = 0; attempt <= max_resamples; ++attempt) {
        const uint64_t attempt_seed = seed + static_cast<uint64_t>(attempt);
        Rng rng(Rng::derive(attempt_seed, 0xf7a3e));
        frame.vectors.assign(nvec, std::vector<double>(static_cast<size_t>(frame.dim)));
        for (auto& vec : frame.vectors)
            for (auto& x : vec) x = rng.normal();

        // Center the sampled ratio distribution at 3/4 (the midpoint of the
        // target band [1/2, 1]).
        std::vector<double> ratios;
        Rng calib(Rng::derive(attempt_seed, 0xca11b));
        for (int s = 0; s < 512; ++s) {
            auto lambda = validation_lambda(nvec, s, calib);
            ratios.push_back(frame_ratio(frame.vectors, frame.dim, lambda, backend));
        }
        std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
        const double median = ratios[ratios.size() / 2];
        if (median <= 0) continue;
        const double scale = 0.75 / median;
        for (auto& vec : frame.vectors)
            for (auto& x : vec) x *= scale;

        Rng validate(Rng::derive(attempt_seed, 0x5a17d));
        frame.worst_lo = 2.0;
        frame.worst_hi = 0.0;
        bool ok = true;
        for (int s = 0; s < validate_samples; ++s) {
            auto lambda = validation_lambda(nvec, s, validate);
            const double r = frame_ratio(frame.vectors, frame.dim, lambda, backend);
            frame.worst_lo = std::min(frame.worst_lo, r);
            frame.worst_hi = std::max(frame.worst_hi, r);
            if (r < 0.5 - backend.tolerance || r > 1.0 + backend.tolerance) {
                ok = false;
                break;
            }
        }
        if (ok) {
            frame.seed = attempt_seed;
            frame.resamples = attempt;
            return frame;
        }
    }
    throw std::runtime_error("sample_frame: validation failed after max resamples (worst lo " +
                             std::to_string(frame.worst_lo) + ", hi " +
                             std::to_string(frame.worst_hi) + ")");
}

double estimate_K(const NormBackend& backend, int depth, int samples, uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("estimate_K: samples must be >= 1");
    if (backend.kind == NormBackend::Kind::l2_exact) return 1.0;
    const int dim = std::max(2, depth);
    Rng rng(Rng::derive(seed, 0xbc57));
    double best = 1.0;  // the full segment always achieves ratio 1
    std::vector<double> v(static_cast<size_t>(dim));
    for (int s = 0; s < samples; ++s) {
        for (auto& x : v) x = rng.normal();
        const double full = backend.vec_norm(v);
        if (full == 0) continue;
        for (int trial = 0; trial < 16; ++trial) {
            int k = static_cast<int>(rng.below(static_cast<uint64_t>(dim)));
            int l = static_cast<int>(rng.below(static_cast<uint64_t>(dim)));
            if (k > l) std::swap(k, l);
            std::vector<double> seg(static_cast<size_t>(dim), 0.0);
            for (int c = k; c <= l; ++c) seg[static_cast<size_t>(c)] = v[static_cast<size_t>(c)];
            best = std::max(best, backend.vec_norm(seg) / full);
        }
    }
    return best;
}

double gen_norm(const std::vector<std::pair<NodeKey, double>>& weights,
                const std::vector<DvoretzkyFrame>& frames, const NormBackend& backend) {
    long total_dim = 0;
    for (const auto& f : frames) total_dim = std::max(total_dim, f.dim_offset + f.dim);
    std::vector<double> y(static_cast<size_t>(total_dim), 0.0);
    for (const auto& [key, w] : weights) {
        const DvoretzkyFrame* home = nullptr;
        int pos = -1;
        for (const auto& f : frames) {
            pos = f.key_pos(key);
            if (pos >= 0) {
                home = &f;
                break;
            }
        }
        if (!home)
            throw std::invalid_argument("gen_norm: key outside the allocated frame ranges");
        const auto& vec = home->vectors[static_cast<size_t>(pos)];
        for (long c = 0; c < home->dim; ++c)
            y[static_cast<size_t>(home->dim_offset + c)] += w * vec[static_cast<size_t>(c)];
    }
    return backend.vec_norm(y);
}

Rational gen_norm_sq_exact(const std::vector<std::pair<NodeKey, SignedSquare>>& weights) {
    Rational total = 0;
    for (const auto& [key, sq] : weights) total += sq.square;
    return total;
}

}  // namespace pettis
