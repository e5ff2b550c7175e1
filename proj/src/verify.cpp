#include "pettis/verify.hpp"

#include "pettis/prng.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <stdexcept>

namespace pettis {

namespace {

using Clock = std::chrono::steady_clock;

long elapsed_ms(Clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
}

Address random_tau(Rng& rng, int max_depth) {
    const int depth = static_cast<int>(rng.below(static_cast<uint64_t>(max_depth) + 1));
    BigInt index = 0;
    for (int i = 0; i < depth; ++i) index = index * 2 + static_cast<long>(rng.below(2));
    return Address::from_index(depth, index);
}

Rational random_rational01(Rng& rng) {
    const long den = 2 + static_cast<long>(rng.below(63));
    const long num = 1 + static_cast<long>(rng.below(static_cast<uint64_t>(den) - 1));
    return make_rat(num, den);
}

std::string enc_str(const RationalEnclosure& e) {
    if (e.is_point()) return rat_to_string(e.lo);
    return "[" + rat_to_string(e.lo) + ", " + rat_to_string(e.hi) + "]";
}

}  // namespace

NormBackend LemmaParams::make_backend() const {
    if (backend == "l2") return NormBackend::l2();
    if (backend == "lp") return NormBackend::lp_float(lp_p, backend_tolerance, seed);
    throw std::invalid_argument("LemmaParams: unknown backend '" + backend + "'");
}

BasicFunction LemmaParams::make_function() const {
    std::vector<Rational> w = weights;
    std::vector<Rational> t = slopes;
    if (t.empty()) t.push_back(make_rat(1, 3));
    if (w.empty()) w.assign(t.size(), Rational(1));
    if (w.size() != t.size())
        throw std::invalid_argument("LemmaParams: weights/slopes length mismatch");
    std::vector<Selector> sels;
    for (const auto& ti : t) sels.push_back(slope_selector(ti));
    return combine(w, sels, kmax);
}

RationalEnclosure sqrt_sum_sq(const std::vector<std::pair<Rational, Rational>>& terms, int bits) {
    Rational exact = 0;
    RationalEnclosure slack = enclose_point(Rational(0));
    for (size_t i = 0; i < terms.size(); ++i) {
        const auto& [ci, qi] = terms[i];
        if (ci < 0 || qi < 0) throw std::invalid_argument("sqrt_sum_sq: negative term");
        exact += ci * ci * qi;
        for (size_t j = i + 1; j < terms.size(); ++j) {
            const auto& [cj, qj] = terms[j];
            const Rational prod = qi * qj;
            const Rational coef = 2 * ci * cj;
            if (auto root = rational_sqrt(prod)) {
                exact += coef * *root;
            } else {
                slack = enclose_add(slack, enclose_scale(sqrt_enclosure(prod, bits), coef));
            }
        }
    }
    return RationalEnclosure{exact + slack.lo, exact + slack.hi, bits};
}

namespace {

// lhs_sq <= (sum c_i sqrt(q_i))^2 with precision escalation; `undecided`
// distinguishes a proven violation from an enclosure too wide to decide.
struct SqrtSumCheck {
    bool pass = false;
    bool undecided = false;
    RationalEnclosure rhs_sq;
};

SqrtSumCheck check_le_sqrt_sum(const Rational& lhs_sq,
                               const std::vector<std::pair<Rational, Rational>>& terms, int bits,
                               int max_bits) {
    SqrtSumCheck result;
    for (int b = bits; b <= max_bits; b *= 2) {
        result.rhs_sq = sqrt_sum_sq(terms, b);
        if (lhs_sq <= result.rhs_sq.lo) {
            result.pass = true;
            return result;
        }
        if (lhs_sq > result.rhs_sq.hi) return result;  // certain violation
    }
    result.undecided = true;
    return result;
}

// --- per-lemma checks -----------------------------------------------------

void lemma_monotone(const LemmaParams& p, LemmaReport& rep) {
    const CarvingConfig cfg = p.carving();
    BasicFunction f = p.make_function();
    Rng rng(Rng::derive(p.seed, 0x312));
    for (int s = 0; s < p.samples; ++s) {
        Rational a, b, c, d;  // [a,b] inside [c,d]
        if (s % 4 == 3) {
            Rational xs[4] = {random_rational01(rng), random_rational01(rng),
                              random_rational01(rng), random_rational01(rng)};
            std::sort(xs, xs + 4);
            c = xs[0], a = xs[1], b = xs[2], d = xs[3];
        } else {
            Address tau = random_tau(rng, std::min(p.tau_depth_cap, f.kmax));
            Address sigma = tau;
            const int extra = static_cast<int>(rng.below(
                static_cast<uint64_t>(f.kmax - tau.depth()) + 1));
            for (int i = 0; i < extra; ++i) sigma = sigma.child(static_cast<int>(rng.below(2)));
            const DyadicInterval I = interval_of(sigma), J = interval_of(tau);
            a = I.lo, b = I.hi, c = J.lo, d = J.hi;
        }
        const Rational inner = norm_sq(integral(f, a, b, cfg));
        const Rational outer = norm_sq(integral(f, c, d, cfg));
        if (!(inner <= outer)) {
            rep.pass = false;
            rep.counterexamples.push_back("inner [" + rat_to_string(a) + "," + rat_to_string(b) +
                                          "] sq=" + rat_to_string(inner) + " > outer sq=" +
                                          rat_to_string(outer));
        }
    }
    rep.steps.push_back({"nested-interval-monotonicity", std::to_string(p.samples) + " samples",
                         "", "exact squared comparisons"});
}

void lemma_restriction(const LemmaParams& p, LemmaReport& rep) {
    const CarvingConfig cfg = p.carving();
    BasicFunction f = p.make_function();
    Rng rng(Rng::derive(p.seed, 0x313));
    for (int s = 0; s < p.samples; ++s) {
        const Address tau = random_tau(rng, std::min(p.tau_depth_cap, f.kmax));
        const DyadicInterval I = interval_of(tau);
        const Rational whole = norm_sq(integral(f, I.lo, I.hi, cfg));
        const BasicFunction ft = restrict_fn(f, tau);
        const Rational restricted = norm_sq(integral(ft, I.lo, I.hi, cfg));
        // the restricted integral is exactly the truncated coefficient sum
        Rational coeff_sum = 0;
        for (int k = tau.depth(); k <= f.kmax; ++k)
            coeff_sum += Rational(BigInt(1) << (k - tau.depth())) * level_coeff_sq_sum(f, k);
        if (!(whole >= restricted) || restricted != coeff_sum) {
            rep.pass = false;
            rep.counterexamples.push_back(
                "tau=" + tau.to_string() + " whole=" + rat_to_string(whole) + " restricted=" +
                rat_to_string(restricted) + " coeff-sum=" + rat_to_string(coeff_sum));
        }
    }
    rep.steps.push_back({"restriction-bound", std::to_string(p.samples) + " samples", "",
                         "norm over I_tau >= restricted norm = coefficient sum, exactly"});
}

void lemma_truncated_identity(const LemmaParams& p, LemmaReport& rep) {
    if (p.tau_depth_cap > p.kmax)
        throw std::invalid_argument("verify 3.2: tau depth cap exceeds kmax");
    const CarvingConfig cfg = p.carving();
    std::vector<Rational> slopes = p.slopes.empty()
                                       ? std::vector<Rational>{make_rat(1, 3)}
                                       : p.slopes;
    const int cap = p.tau_depth_cap;
    for (const Rational& t : slopes) {
        BasicFunction f = make_fn(slope_selector(t), p.kmax);
        for (int depth = 0; depth <= cap; ++depth) {
            const BigInt addresses = BigInt(1) << depth;
            for (BigInt m = 0; m < addresses; ++m) {
                const Address tau = Address::from_index(depth, m);
                const DyadicInterval I = interval_of(tau);
                const Rational got =
                    norm_sq(integral(restrict_fn(f, tau), I.lo, I.hi, cfg));
                const Rational want = pow2(-depth) * inv_square_sum(depth, p.kmax);
                if (got != want) {
                    rep.pass = false;
                    rep.counterexamples.push_back("t=" + rat_to_string(t) + " tau=" +
                                                  tau.to_string() + " got=" + rat_to_string(got) +
                                                  " want=" + rat_to_string(want));
                }
            }
        }
    }
    rep.steps.push_back({"truncated-norm-identity",
                         "all tau with depth <= " + std::to_string(cap),
                         "2^-i * sum_{k=i}^{kmax} 1/(k+1)^2", "exact rational equality"});
}

void lemma_triangle(const LemmaParams& p, LemmaReport& rep, bool restricted) {
    const CarvingConfig cfg = p.carving();
    Rng rng(Rng::derive(p.seed, restricted ? 0x33a : 0x45a));
    std::vector<Rational> slopes = p.slopes;
    std::vector<Rational> weights = p.weights;
    if (slopes.empty()) {
        slopes = {make_rat(1, 3), make_rat(1, 2)};
        weights = {Rational(1), make_rat(1, 2)};
    }
    if (weights.empty()) weights.assign(slopes.size(), Rational(1));

    std::vector<Selector> sels;
    for (const auto& t : slopes) sels.push_back(slope_selector(t));
    BasicFunction f = combine(weights, sels, p.kmax);

    for (int s = 0; s < p.samples; ++s) {
        const Address tau = random_tau(rng, std::min(p.tau_depth_cap, p.kmax));
        const DyadicInterval I = interval_of(tau);
        const BasicFunction target = restricted ? restrict_fn(f, tau) : f;
        const Rational lhs_sq = norm_sq(integral(target, I.lo, I.hi, cfg));
        std::vector<std::pair<Rational, Rational>> rhs_terms;
        for (size_t i = 0; i < weights.size(); ++i) {
            BasicFunction fi = make_fn(sels[i], p.kmax);
            if (restricted) fi = restrict_fn(fi, tau);
            rhs_terms.emplace_back(rat_abs(weights[i]),
                                   norm_sq(integral(fi, I.lo, I.hi, cfg)));
        }
        const auto check = check_le_sqrt_sum(lhs_sq, rhs_terms, p.precision_bits,
                                             p.max_precision_bits);
        if (!check.pass) {
            rep.pass = false;
            rep.counterexamples.push_back(
                "tau=" + tau.to_string() + " lhs_sq=" + rat_to_string(lhs_sq) + " rhs_sq=" +
                enc_str(check.rhs_sq) + (check.undecided ? " (undecided at max precision)" : ""));
        }
        if (s == 0)
            rep.steps.push_back({restricted ? "triangle-restricted" : "triangle",
                                 rat_to_string(lhs_sq), enc_str(check.rhs_sq),
                                 "lhs_sq <= (sum |w| ||int f_i||)^2"});
    }
}

void lemma_frame(const LemmaParams& p, LemmaReport& rep) {
    const NormBackend backend = p.make_backend();
    BlockSchedule sched = p.cuts.empty() ? BlockSchedule::from_cuts({0, 1, 3}, false)
                                         : BlockSchedule::from_cuts(p.cuts, false);
    try {
        const DvoretzkyFrame frame =
            sample_frame(p.block, sched, backend, p.seed, p.frame_validate, p.dim_factor);
        rep.steps.push_back({"frame-validation",
                             "worst lo " + std::to_string(frame.worst_lo),
                             "worst hi " + std::to_string(frame.worst_hi),
                             "ratios within [1/2, 1] after " + std::to_string(frame.resamples) +
                                 " resamples, " + std::to_string(p.frame_validate) + " samples"});
    } catch (const std::exception& e) {
        rep.pass = false;
        rep.counterexamples.push_back(e.what());
    }
}

// Exact block coefficient sum of f inside [tau] for depths in [lo, hi].
Rational block_tau_coeff_sq(const BasicFunction& f, const Address& tau, long lo, long hi) {
    Rational total = 0;
    for (long k = std::max<long>(lo, tau.depth()); k < hi && k <= f.kmax; ++k)
        total += Rational(BigInt(1) << (k - tau.depth())) *
                 level_coeff_sq_sum(f, static_cast<int>(k));
    return total;
}

void lemma_block_estimates(const LemmaParams& p, LemmaReport& rep) {
    const CarvingConfig cfg = p.carving();
    BlockSchedule sched = p.cuts.empty() ? make_schedule(2) : BlockSchedule::from_cuts(p.cuts, false);
    BasicFunction f = p.make_function();
    const NormBackend backend = with_estimated_K(p.make_backend(), 32, 2000);
    const double khat = backend.k_estimate;

    // frames for the empirical route (every block that meets the truncation)
    std::optional<std::vector<DvoretzkyFrame>> frames;
    if (backend.kind != NormBackend::Kind::l2_exact) {
        frames.emplace();
        BigInt total = 0;
        for (int j = 0; j < sched.blocks() && sched.block_lo(j) <= p.kmax; ++j) {
            total += sched.block_size(j);
            if (total > 4096)
                throw std::invalid_argument("verify 4.3: blocks too large to materialize frames");
            frames->push_back(sample_frame(j, sched, backend,
                                           Rng::derive(p.seed, static_cast<uint64_t>(j)),
                                           p.frame_validate, p.dim_factor));
        }
    }
    auto frame_norm = [&](const BasicFunction& fn, const Rational& lo, const Rational& hi) {
        std::vector<std::pair<NodeKey, double>> weights;
        for (const auto& [key, sq] : materialize_components(fn, lo, hi, cfg, 1u << 16))
            weights.emplace_back(key, sq.sign * std::sqrt(rat_to_double(sq.square)));
        return gen_norm(weights, *frames, backend);
    };

    // (1) block-sum integrability certificate
    RationalEnclosure block_sum = enclose_point(Rational(0));
    for (int j = 0; j < sched.blocks(); ++j) {
        Rational s = 0;
        for (long k = sched.block_lo(j); k < sched.block_hi(j) && k <= f.kmax; ++k)
            s += Rational(BigInt(1) << k) * level_coeff_sq_sum(f, static_cast<int>(k));
        block_sum = enclose_add(block_sum, sqrt_enclosure(s, p.precision_bits));
    }
    rep.steps.push_back({"block-sum-certificate", enc_str(block_sum), "",
                         "sum over blocks of sqrt(block coefficient mass), truncated"});

    const int k = p.block;
    if (k < 0 || k >= sched.blocks())
        throw std::invalid_argument("verify 4.3: block index outside schedule");
    if (sched.block_lo(k) > p.kmax)
        throw std::invalid_argument("verify 4.3: block beyond kmax");
    Rng rng(Rng::derive(p.seed, 0x43));
    for (int s = 0; s < std::max(1, p.samples / 10); ++s) {
        BigInt idx = 0;
        for (long b = 0; b < sched.block_lo(k); ++b) idx = idx * 2 + static_cast<long>(rng.below(2));
        const Address tau = Address::from_index(static_cast<int>(sched.block_lo(k)), idx);
        const DyadicInterval I = interval_of(tau);

        const BasicFunction ft = restrict_fn(f, tau);
        const Rational mid_sq = norm_sq(integral(ft, I.lo, I.hi, cfg));
        const Rational whole_sq = norm_sq(integral(f, I.lo, I.hi, cfg));

        // (2) lower: ||int f|tau|| >= (1/2K) sqrt(block mass in [tau])
        const Rational block_mass = block_tau_coeff_sq(f, tau, sched.block_lo(k), sched.block_hi(k));
        const Rational khat_sq = Rational(khat) * Rational(khat);
        if (!(mid_sq * 4 * khat_sq >= block_mass)) {
            rep.pass = false;
            rep.counterexamples.push_back("4.3(2) lower fails at tau=" + tau.to_string());
        }
        // (2) upper: ||int f|tau|| <= sum_{j>=k} sqrt(block mass_j in [tau])
        std::vector<std::pair<Rational, Rational>> upper_terms;
        for (int j = k; j < sched.blocks(); ++j)
            upper_terms.emplace_back(
                Rational(1), block_tau_coeff_sq(f, tau, sched.block_lo(j), sched.block_hi(j)));
        // levels past the last cut, if the truncation exceeds the schedule
        if (sched.block_hi(sched.blocks() - 1) <= p.kmax)
            upper_terms.emplace_back(
                Rational(1),
                block_tau_coeff_sq(f, tau, sched.block_hi(sched.blocks() - 1), p.kmax + 1));
        const auto upper = check_le_sqrt_sum(mid_sq, upper_terms, p.precision_bits,
                                             p.max_precision_bits);
        if (!upper.pass) {
            rep.pass = false;
            rep.counterexamples.push_back("4.3(2) upper fails at tau=" + tau.to_string() +
                                          (upper.undecided ? " (undecided)" : ""));
        }
        // (3) ||int_I f|| >= (1/K) ||int_I f|tau||: exact on the l2 pipeline,
        // frame-evaluated under empirical backends
        if (!(whole_sq * khat_sq >= mid_sq)) {
            rep.pass = false;
            rep.counterexamples.push_back("4.3(3) fails at tau=" + tau.to_string());
        }
        if (frames) {
            const double nf = frame_norm(f, I.lo, I.hi);
            const double nm = frame_norm(ft, I.lo, I.hi);
            if (!(nf >= nm / khat - backend.tolerance * (1.0 + nm))) {
                rep.pass = false;
                rep.counterexamples.push_back("4.3(3) empirical fails at tau=" + tau.to_string());
            }
        }
        if (s == 0) {
            rep.steps.push_back({"4.3(2)-lower", rat_to_string(mid_sq),
                                 rat_to_string(block_mass / (4 * khat_sq)), "squared, exact"});
            rep.steps.push_back({"4.3(2)-upper", rat_to_string(mid_sq), enc_str(upper.rhs_sq),
                                 "squared, enclosure"});
            rep.steps.push_back({"4.3(3)", rat_to_string(whole_sq),
                                 rat_to_string(mid_sq / khat_sq), "squared, exact"});
        }
    }
}

void lemma_block_bracket(const LemmaParams& p, LemmaReport& rep) {
    const CarvingConfig cfg = p.carving();
    BlockSchedule sched = p.cuts.empty() ? BlockSchedule::from_cuts({0, 1, 3}, false)
                                         : BlockSchedule::from_cuts(p.cuts, false);
    const NormBackend backend = p.make_backend();
    const int k = p.block;
    if (k < 0 || k >= sched.blocks())
        throw std::invalid_argument("verify 4.4: block index outside schedule");
    const long nk = sched.block_lo(k);
    if (nk > p.kmax) throw std::invalid_argument("verify 4.4: block beyond kmax");

    const double khat = backend.kind == NormBackend::Kind::l2_exact
                            ? 1.0
                            : estimate_K(backend, 32, 2000, p.seed);
    const Rational slack = make_rat(1000001, 1000000);
    std::vector<Rational> slopes = p.slopes.empty()
                                       ? std::vector<Rational>{make_rat(1, 3)}
                                       : p.slopes;
    const Rational uk_sq = sched.u_sq[static_cast<size_t>(k)];

    std::optional<std::vector<DvoretzkyFrame>> frames;
    if (backend.kind != NormBackend::Kind::l2_exact) {
        frames.emplace();
        BigInt total = 0;
        for (int j = 0; j < sched.blocks() && sched.block_lo(j) <= p.kmax; ++j) {
            total += sched.block_size(j);
            if (total > 4096)
                throw std::invalid_argument("verify 4.4: blocks too large to materialize frames");
            frames->push_back(sample_frame(j, sched, backend,
                                           Rng::derive(p.seed, static_cast<uint64_t>(j)),
                                           p.frame_validate, p.dim_factor));
        }
    }

    Rng rng(Rng::derive(p.seed, 0x44));
    for (int s = 0; s < p.samples; ++s) {
        const Rational t = slopes[static_cast<size_t>(rng.below(slopes.size()))];
        BasicFunction f = make_fn(slope_selector(t), p.kmax);
        BigInt idx = 0;
        for (long b = 0; b < nk; ++b) idx = idx * 2 + static_cast<long>(rng.below(2));
        const Address tau = Address::from_index(static_cast<int>(nk), idx);
        const DyadicInterval I = interval_of(tau);
        const BasicFunction ft = restrict_fn(f, tau);

        // bracket: (1/2K) 2^{-nk/2} u_k <= ||int f|tau|| <= (3/2) 2^{-nk/2} u_k;
        // both ends are exact rationals on squares
        const Rational lower_sq = pow2(-nk) * uk_sq / (4 * Rational(khat) * Rational(khat));
        const Rational upper_sq_bound = pow2(-nk) * uk_sq * make_rat(9, 4);

        bool ok;
        std::string got;
        if (backend.kind == NormBackend::Kind::l2_exact) {
            const Rational mid_sq = norm_sq(integral(ft, I.lo, I.hi, cfg));
            ok = mid_sq * slack * slack >= lower_sq && mid_sq <= upper_sq_bound * slack * slack;
            got = rat_to_string(mid_sq);
        } else {
            const auto comps = materialize_components(ft, I.lo, I.hi, cfg, 1u << 16);
            std::vector<std::pair<NodeKey, double>> weights;
            for (const auto& [key, sq] : comps)
                weights.emplace_back(key, sq.sign * std::sqrt(rat_to_double(sq.square)));
            const double norm = gen_norm(weights, *frames, backend);
            const double lo_bound = std::sqrt(rat_to_double(lower_sq));
            const double hi_bound = std::sqrt(rat_to_double(upper_sq_bound));
            const double sl = 1.0 + 1e-6;
            ok = norm * sl >= lo_bound && norm <= hi_bound * sl;
            got = std::to_string(norm);
        }
        if (!ok) {
            rep.pass = false;
            rep.counterexamples.push_back("4.4 bracket fails: t=" + rat_to_string(t) + " tau=" +
                                          tau.to_string() + " norm=" + got);
        }
        if (s == 0)
            rep.steps.push_back({"4.4-bracket", rat_to_string(lower_sq),
                                 rat_to_string(upper_sq_bound),
                                 "squared bracket bounds, K-hat=" + std::to_string(khat)});
    }
}

}  // namespace

LemmaReport verify_lemma(const std::string& id, const LemmaParams& p) {
    const auto start = Clock::now();
    LemmaReport rep;
    rep.lemma = id;
    rep.params["kmax"] = std::to_string(p.kmax);
    rep.params["samples"] = std::to_string(p.samples);
    rep.params["seed"] = std::to_string(p.seed);
    rep.params["backend"] = p.backend;

    if (id == "3.1-2") {
        lemma_monotone(p, rep);
    } else if (id == "3.1-3") {
        lemma_restriction(p, rep);
    } else if (id == "3.2") {
        lemma_truncated_identity(p, rep);
    } else if (id == "3.3") {
        lemma_triangle(p, rep, /*restricted=*/true);
        lemma_triangle(p, rep, /*restricted=*/false);
    } else if (id == "4.2") {
        lemma_frame(p, rep);
    } else if (id == "4.3") {
        lemma_block_estimates(p, rep);
    } else if (id == "4.4") {
        lemma_block_bracket(p, rep);
    } else if (id == "4.5") {
        lemma_triangle(p, rep, /*restricted=*/false);
    } else {
        throw std::invalid_argument("verify_lemma: unknown lemma id '" + id + "'");
    }
    rep.ms = elapsed_ms(start);
    return rep;
}

namespace {

struct Renumerated {
    std::vector<Rational> weights;  // normalized, leading weight 1
    std::vector<Selector> selectors;
    Rational scale;  // original leading weight
};

Renumerated renumerate(const std::vector<Rational>& weights,
                       const std::vector<Selector>& selectors) {
    if (weights.size() != selectors.size())
        throw std::invalid_argument("blowup_witness: weights/selectors length mismatch");
    Renumerated out;
    for (size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] == 0) continue;
        bool merged = false;
        for (size_t j = 0; j < out.selectors.size(); ++j) {
            if (out.selectors[j] == selectors[i]) {
                out.weights[j] += weights[i];
                merged = true;
                break;
            }
        }
        if (!merged) {
            out.weights.push_back(weights[i]);
            out.selectors.push_back(selectors[i]);
        }
    }
    for (size_t i = 0; i < out.weights.size();) {
        if (out.weights[i] == 0) {
            out.weights.erase(out.weights.begin() + static_cast<long>(i));
            out.selectors.erase(out.selectors.begin() + static_cast<long>(i));
        } else {
            ++i;
        }
    }
    if (out.weights.empty())
        throw std::invalid_argument("blowup_witness: zero function (degenerate weights)");
    out.scale = out.weights[0];
    for (auto& w : out.weights) w /= out.scale;
    return out;
}

// Window [lo, hi]: minimal depth j >= 1 and address tau with I_tau inside.
std::pair<int, Address> minimal_contained_dyadic(const Rational& lo, const Rational& hi,
                                                 int depth_cap) {
    for (int d = 1; d <= depth_cap; ++d) {
        const BigInt m = rat_ceil(lo * pow2(d));
        if (Rational(m + 1) * pow2(-d) <= hi) return {d, Address::from_index(d, m)};
    }
    throw std::logic_error("minimal_contained_dyadic: no dyadic interval within depth cap");
}

long collision_horizon(const Renumerated& r, int retained_count) {
    for (int i = 0; i < retained_count; ++i)
        if (r.selectors[static_cast<size_t>(i)].kind() != Selector::Kind::slope)
            throw std::invalid_argument("blowup_witness: selectors must be slope selectors");
    long l = 0;
    for (int i = 0; i < retained_count; ++i)
        for (int j = i + 1; j < retained_count; ++j)
            l = std::max(l, collision_bound(r.selectors[static_cast<size_t>(i)].slope_value(),
                                            r.selectors[static_cast<size_t>(j)].slope_value()));
    return l;
}

}  // namespace

BlowupWitness blowup_witness(const std::vector<Rational>& weights,
                             const std::vector<Selector>& selectors, const Rational& x,
                             const Rational& M, const std::string& mode,
                             const BlowupParams& params) {
    if (x < 0 || x > 1) throw std::domain_error("blowup_witness: x outside [0,1]");
    if (M < 0) throw std::invalid_argument("blowup_witness: M must be >= 0");
    if (mode != "l2" && mode != "general")
        throw std::invalid_argument("blowup_witness: mode must be 'l2' or 'general'");

    const Renumerated r = renumerate(weights, selectors);
    const int n = static_cast<int>(r.weights.size());
    const Rational M_norm = M / rat_abs(r.scale);

    BlowupWitness w;
    w.mode = mode;
    w.x = x;
    w.M = M;
    w.scale = r.scale;

    // tail cutoff: smallest i0 (1-based) with sum_{i >= i0} |lambda_i| below
    // the mode's threshold.
    const Rational tail_threshold = make_rat(1, 2);  // general mode tightens below
    Rational tail = 0;
    for (int i = n; i >= 1; --i) {
        const Rational next = tail + rat_abs(r.weights[static_cast<size_t>(i - 1)]);
        if (next >= tail_threshold) break;
        tail = next;
        w.i0 = i;
    }
    if (w.i0 == 0) w.i0 = n + 1;  // no admissible cutoff short of dropping everything
    if (w.i0 < 2 && n >= 1) w.i0 = std::max(w.i0, 2);
    const int retained = std::min(w.i0, n);
    Rational tail_weight = 0;
    for (int i = w.i0; i <= n; ++i) tail_weight += rat_abs(r.weights[static_cast<size_t>(i - 1)]);
    if (!(tail_weight < tail_threshold))
        throw std::invalid_argument("blowup_witness: no tail cutoff with tail below 1/2");

    w.l = collision_horizon(r, retained);
    w.steps.push_back({"tail-cutoff", "i0=" + std::to_string(w.i0),
                       "tail=" + rat_to_string(tail_weight), "tail weight below 1/2"});
    w.steps.push_back({"collision-horizon", "l=" + std::to_string(w.l), "",
                       "max pairwise collision bound of the retained slopes"});

    const CarvingConfig cfg{params.kmax, params.pieces_per_set, nullptr};
    std::vector<Selector> retained_sel(r.selectors.begin(), r.selectors.begin() + retained);
    std::vector<Rational> retained_w(r.weights.begin(), r.weights.begin() + retained);
    BasicFunction f = combine(r.weights, r.selectors, params.kmax);
    BasicFunction f_ret = combine(retained_w, retained_sel, params.kmax);
    Rational retained_sq = 0;
    for (const auto& wi : retained_w) retained_sq += wi * wi;

    if (mode == "general") {
        // --- general mode: endpoint quotient over the block-level witness interval
        BlockSchedule sched = params.cuts.empty()
                                  ? make_schedule(2)
                                  : BlockSchedule::from_cuts(params.cuts, false);
        const NormBackend backend = params.backend == "lp"
                                        ? NormBackend::lp_float(params.lp_p, 1e-9, params.seed)
                                        : NormBackend::l2();
        const double khat = backend.kind == NormBackend::Kind::l2_exact
                                ? 1.0
                                : estimate_K(backend, 32, 2000, params.seed);
        const Rational Kr = Rational(khat);

        // general tail threshold 1/(8K)
        if (!(tail_weight < make_rat(1, 8) / Kr))
            throw std::invalid_argument("blowup_witness: tail weight not below 1/(8K)");

        int chosen = -1;
        for (int k = 0; k < sched.blocks(); ++k) {
            const long nk = sched.block_lo(k);
            if (nk < w.l || sched.block_hi(k) - 1 > params.kmax) continue;
            // (1/(4K^2)) 2^{nk/2} u_k > M  <=>  2^{nk} u_k^2 > (4 K^2 M)^2
            const Rational lhs = pow2(nk) * sched.u_sq[static_cast<size_t>(k)];
            const Rational rhs = 16 * Kr * Kr * Kr * Kr * M_norm * M_norm;
            if (lhs > rhs) {
                chosen = k;
                break;
            }
        }
        if (chosen < 0)
            throw std::runtime_error(
                "blowup_witness: no block reaches the target at this kmax/schedule "
                "(extend the schedule or raise kmax)");
        w.level = chosen;
        const long nk = sched.block_lo(chosen);
        const Address tau = locate(x, static_cast<int>(nk));
        w.tau = tau;
        w.delta = pow2(-nk);
        const DyadicInterval I = interval_of(tau);

        // Norms flow through the backend: exact on the l2 pipeline, frame
        // evaluation under empirical backends (small truncations only).
        std::optional<std::vector<DvoretzkyFrame>> frames;
        if (backend.kind != NormBackend::Kind::l2_exact) {
            frames.emplace();
            BigInt total = 0;
            for (int j = 0; j < sched.blocks() && sched.block_lo(j) <= params.kmax; ++j) {
                total += sched.block_size(j);
                if (total > 4096)
                    throw std::invalid_argument(
                        "blowup_witness: blocks too large to materialize frames");
                frames->push_back(sample_frame(j, sched, backend,
                                               Rng::derive(params.seed, static_cast<uint64_t>(j)),
                                               params.frame_validate, params.dim_factor));
            }
        }
        auto backend_norm_sq = [&](const BasicFunction& fn, const Rational& lo_pt,
                                   const Rational& hi_pt) -> Rational {
            if (!frames) return norm_sq(integral(fn, lo_pt, hi_pt, cfg));
            std::vector<std::pair<NodeKey, double>> comps;
            for (const auto& [key, sq] : materialize_components(fn, lo_pt, hi_pt, cfg, 1u << 16))
                comps.emplace_back(key, sq.sign * std::sqrt(rat_to_double(sq.square)));
            const double nrm = gen_norm(comps, *frames, backend);
            return Rational(nrm) * Rational(nrm);
        };
        // margin for the float route (decisive checks stay exact on l2)
        const Rational margin =
            frames ? Rational(1) - Rational(backend.tolerance) - make_rat(1, 1000000) : Rational(1);

        const Rational interval_sq = backend_norm_sq(f, I.lo, I.hi);
        const Rational len = I.length();
        QuotientSample sample;
        sample.h = len;
        sample.depth = static_cast<int>(nk);
        sample.tau = tau;
        sample.window_norm_sq = interval_sq;
        sample.tau_norm_sq = interval_sq;
        sample.tau_restricted_sq = backend_norm_sq(restrict_fn(f, tau), I.lo, I.hi);
        sample.quotient_sq = r.scale * r.scale * interval_sq / (len * len);
        sample.pass = interval_sq > M_norm * M_norm * len * len * margin;
        // lower-bound chain: L1 >= (1/2K) 2^{-nk/2} u_k, L2 <= tail * 2^{-nk/2} * sum u_j
        RationalEnclosure tail_u = enclose_point(Rational(0));
        for (int j = chosen; j < sched.blocks(); ++j) {
            const long lo = sched.block_lo(j);
            if (lo > params.kmax) break;
            const long hi = std::min<long>(sched.block_hi(j) - 1, params.kmax);
            tail_u = enclose_add(tail_u, sqrt_enclosure(inv_square_sum(static_cast<int>(lo),
                                                                       static_cast<int>(hi)),
                                                        params.precision_bits));
        }
        const Rational l1_lo_sq = pow2(-nk) * sched.u_sq[static_cast<size_t>(chosen)] / (4 * Kr * Kr);
        const RationalEnclosure l2_hi = enclose_scale(tail_u, tail_weight);
        const Rational l2_hi_sq_scaled = pow2(-nk) * l2_hi.hi * l2_hi.hi;
        w.steps.push_back({"general-L1-lower-sq", rat_to_string(l1_lo_sq), "", "(u_k / 2K)^2 2^-nk"});
        w.steps.push_back({"general-L2-upper-sq", rat_to_string(l2_hi_sq_scaled), "",
                           "(tail * sum u_j)^2 2^-nk"});
        // endpoint split: one-sided quotients at x
        w.samples.push_back(sample);
        Rational best_side_sq = 0;
        const Rational half_target_sq = M_norm * M_norm / 4;
        auto push_side = [&](const Rational& lo_pt, const Rational& hi_pt, bool left) {
            const Rational span = hi_pt - lo_pt;
            const Rational side_sq = backend_norm_sq(f, lo_pt, hi_pt);
            QuotientSample side;
            side.h = left ? -span : span;
            side.depth = static_cast<int>(nk);
            side.tau = tau;
            side.window_norm_sq = side_sq;
            side.quotient_sq = r.scale * r.scale * side_sq / (span * span);
            side.pass = side_sq / (span * span) > half_target_sq;  // this side beats M/2
            best_side_sq = rat_max(best_side_sq, side_sq / (span * span));
            w.samples.push_back(side);
        };
        if (x > I.lo) push_side(I.lo, x, /*left=*/true);
        if (x < I.hi) push_side(x, I.hi, /*left=*/false);
        // one of the one-sided quotients must exceed M/2
        const bool split_ok = best_side_sq * 4 > M_norm * M_norm;
        w.verdict = (sample.pass && split_ok) ? "pass" : "fail";
        w.steps.push_back({"endpoint-split", rat_to_string(best_side_sq),
                           rat_to_string(M_norm * M_norm / 4), "best one-sided quotient_sq vs (M/2)^2"});
        return w;
    }

    // --- l2 mode ------------------------------------------------------------
    // Feasibility: least j > l with 2^{j-6} sum_{k=j}^{kmax} 1/(k+1)^2 > M^2.
    auto feasible = [&](int j, int kmax) {
        return pow2(j - 6) * inv_square_sum(j, kmax) > M_norm * M_norm;
    };
    int j_star = -1;
    for (int j = static_cast<int>(w.l) + 1; j <= params.kmax; ++j) {
        if (feasible(j, params.kmax)) {
            j_star = j;
            break;
        }
    }
    int run_end = j_star;
    while (run_end >= 0 && run_end + 1 <= params.kmax && feasible(run_end + 1, params.kmax))
        ++run_end;
    if (j_star < 0 || run_end < j_star + 2) {
        // search the minimal kmax that would make the target reachable
        int needed = -1;
        for (int kk = params.kmax + 1; kk <= 96; ++kk) {
            int js = -1;
            for (int j = static_cast<int>(w.l) + 1; j <= kk; ++j)
                if (pow2(j - 6) * inv_square_sum(j, kk) > M_norm * M_norm) {
                    js = j;
                    break;
                }
            if (js >= 0 && js + 2 <= kk &&
                pow2(js + 1 - 6) * inv_square_sum(js + 1, kk) > M_norm * M_norm &&
                pow2(js + 2 - 6) * inv_square_sum(js + 2, kk) > M_norm * M_norm) {
                needed = kk;
                break;
            }
        }
        throw std::runtime_error("blowup_witness: kmax too small to reach M (minimal kmax found: " +
                                 (needed > 0 ? std::to_string(needed) : std::string("beyond 96")) +
                                 ")");
    }
    w.level = j_star;
    w.delta = pow2(-j_star);
    w.steps.push_back({"feasibility", "j=" + std::to_string(j_star),
                       rat_to_string(pow2(j_star - 6) * inv_square_sum(j_star, params.kmax)),
                       "2^{j-6} tail sum > M^2 = " + rat_to_string(M_norm * M_norm)});

    // selector-distinctness spot check at the first usable levels
    for (int k = j_star; k <= std::min(j_star + 4, params.kmax); ++k)
        for (int i = 0; i < retained; ++i)
            for (int j2 = i + 1; j2 < retained; ++j2)
                if (retained_sel[static_cast<size_t>(i)].value(k) ==
                    retained_sel[static_cast<size_t>(j2)].value(k))
                    throw std::logic_error("blowup_witness: retained selectors collide past the horizon");
    w.steps.push_back({"selector-distinctness", "levels " + std::to_string(j_star) + "..",
                       "", "retained selectors pairwise distinct past the horizon"});

    const int rmax = run_end - j_star - 1;
    Rng rng(Rng::derive(params.seed, 0xb10));
    bool all_pass = true;
    for (int s = 0; s < params.sample_count; ++s) {
        const int rr = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(rmax)));
        const BigInt odd = 2 * BigInt(static_cast<long>(rng.below(1ULL << std::min(rr - 1, 40)))) + 1;
        Rational h_mag = Rational(odd) * pow2(-(j_star + rr));
        bool go_right = x + h_mag <= 1;
        const bool can_left = x - h_mag >= 0;
        if (go_right && can_left) go_right = rng.below(2) == 0;
        const Rational h = go_right ? h_mag : -h_mag;
        const Rational w_lo = go_right ? x : x - h_mag;
        const Rational w_hi = go_right ? x + h_mag : x;

        QuotientSample sample;
        sample.h = h;
        auto [jh, tau] = minimal_contained_dyadic(w_lo, w_hi, params.kmax);
        sample.depth = jh;
        sample.tau = tau;
        if (!(jh > w.l) || !feasible(jh, params.kmax))
            throw std::logic_error("blowup_witness: sampled window escaped the feasible band");

        const DyadicInterval I = interval_of(tau);
        sample.window_norm_sq = norm_sq(integral(f, w_lo, w_hi, cfg));
        sample.tau_norm_sq = norm_sq(integral(f, I.lo, I.hi, cfg));
        sample.tau_restricted_sq = norm_sq(integral(restrict_fn(f, tau), I.lo, I.hi, cfg));

        // retained-orthogonality: the combined retained function integrates
        // over I_tau to exactly (sum lambda_i^2) 2^-j T
        const Rational T = inv_square_sum(jh, params.kmax);
        const Rational l1_sq = retained_sq * pow2(-jh) * T;
        const Rational l1_direct =
            norm_sq(integral(restrict_fn(f_ret, tau), I.lo, I.hi, cfg));
        if (l1_direct != l1_sq)
            throw std::logic_error("blowup_witness: retained-orthogonality identity failed");

        // (L1 - L2)^2 with L2 bounded by tail * sqrt(2^-j T)
        const Rational l2b_sq = tail_weight * tail_weight * pow2(-jh) * T;
        const Rational cross = l1_sq * l2b_sq;
        RationalEnclosure lower;
        int bits = params.precision_bits;
        if (auto root = rational_sqrt(cross)) {
            lower = enclose_point(l1_sq + l2b_sq - 2 * *root);
        } else {
            RationalEnclosure c = sqrt_enclosure(cross, bits);
            lower = RationalEnclosure{l1_sq + l2b_sq - 2 * c.hi, l1_sq + l2b_sq - 2 * c.lo, bits};
        }
        sample.lower_sq = lower;

        bool chain_ok = sample.window_norm_sq >= sample.tau_norm_sq &&
                        sample.tau_norm_sq >= sample.tau_restricted_sq;
        // restricted norm >= (L1 - L2): escalate the cross enclosure if needed
        while (!(sample.tau_restricted_sq >= lower.hi) && bits < params.max_precision_bits) {
            bits *= 2;
            RationalEnclosure c = sqrt_enclosure(cross, bits);
            lower = RationalEnclosure{l1_sq + l2b_sq - 2 * c.hi, l1_sq + l2b_sq - 2 * c.lo, bits};
        }
        chain_ok = chain_ok && sample.tau_restricted_sq >= lower.hi;
        // h < 4 * 2^-j
        chain_ok = chain_ok && h_mag < 4 * pow2(-jh);

        sample.quotient_sq = r.scale * r.scale * sample.window_norm_sq / (h_mag * h_mag);
        const bool decisive = sample.window_norm_sq > M_norm * M_norm * h_mag * h_mag;
        sample.pass = chain_ok && decisive;
        all_pass = all_pass && sample.pass;
        if (s == 0) w.tau = tau;
        w.samples.push_back(std::move(sample));
    }
    w.verdict = all_pass ? "pass" : "fail";
    return w;
}

std::vector<QuotientRow> quotient_table(const BasicFunction& f, const Rational& x,
                                        const std::vector<Rational>& hs, const CarvingConfig& cfg,
                                        int bits) {
    std::vector<QuotientRow> rows;
    for (const Rational& h : hs) {
        if (h == 0) throw std::invalid_argument("quotient_table: h must be nonzero");
        const Rational y = x + h;
        if (y < 0 || y > 1) throw std::domain_error("quotient_table: x+h outside [0,1]");
        const Rational q_sq = norm_sq(primitive_diff(f, x, h, cfg)) / (h * h);
        rows.push_back(QuotientRow{x, h, q_sq, sqrt_enclosure(q_sq, bits)});
    }
    return rows;
}

}  // namespace pettis
