#include "pettis/carving.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace pettis {

namespace {

BigInt pow2z(long k) {
    BigInt p = 1;
    mpz_mul_2exp(p.get_mpz_t(), p.get_mpz_t(), static_cast<mp_bitcnt_t>(k));
    return p;
}

// Smallest power of two >= n (n >= 1).
BigInt bit_ceil_z(long n) {
    BigInt p = 1;
    while (p < n) p <<= 1;
    return p;
}

std::string key_str(const NodeKey& k) {
    return "(" + k.sigma.to_string() + "," + std::to_string(k.level_index) + ")";
}

}  // namespace

void CarvingConfig::validate() const {
    if (kmax < 0) throw std::invalid_argument("CarvingConfig: kmax must be >= 0");
    if (kmax > 127) throw std::invalid_argument("CarvingConfig: kmax above 127 unsupported");
    if (pieces_per_set < 1) throw std::invalid_argument("CarvingConfig: pieces_per_set must be >= 1");
}

int carving_grid_depth(int kmax) { return 2 * kmax + 8; }

Rational budget(const NodeKey& key, const CarvingConfig& cfg) {
    if (cfg.budget_override) return cfg.budget_override(key);
    const int d = key.depth();
    // 2^-d * 4^-(d+2) / (d+1) = 1 / ((d+1) * 2^(3d+4))
    return make_rat(BigInt(1), BigInt(d + 1) * pow2z(3L * d + 4));
}

Rational budget_sum_through(int kmax) {
    // sum_d 2^d (d+1) budget(d) = sum_d 4^-(d+2) = (1/12)(1 - 4^-(kmax+1))
    return make_rat(BigInt(1), BigInt(12)) * (Rational(1) - pow2(-2L * (kmax + 1)));
}

Rational descendant_budget_below(int k, int kmax) {
    Rational s = 0;
    for (int d = k + 1; d <= kmax; ++d) s += pow2(-2L * (d + 2));
    return pow2(-k) * s;
}

CarvedSet CarvedSet::from_pieces(NodeKey key,
                                 const std::vector<std::pair<Rational, Rational>>& pieces,
                                 int kmax) {
    CarvedSet set;
    set.key = std::move(key);
    set.kmax = kmax;
    set.measure = 0;
    Rational prev_end(-1);
    for (const auto& [lo, hi] : pieces) {
        if (lo >= hi) throw std::invalid_argument("CarvedSet: empty or inverted piece");
        if (lo <= prev_end) throw std::invalid_argument("CarvedSet: pieces must be sorted and disjoint");
        set.runs.push_back(PieceRun{lo, hi - lo, Rational(0), BigInt(1)});
        set.measure += hi - lo;
        prev_end = hi;
    }
    return set;
}

CarvedSet carve(const NodeKey& key, const CarvingConfig& cfg) {
    cfg.validate();
    const int d = key.depth();
    const int i = key.level_index;
    if (d > cfg.kmax) throw std::invalid_argument("carve: address deeper than cfg.kmax");

    const int G = carving_grid_depth(cfg.kmax);
    const Rational g = pow2(-G);

    // Counter range of class-d cells inside I_sigma: the class-d cell with
    // counter q has global index q*2^(d+1) + (2^d - 1); the counters inside
    // I_sigma form [idx * R, (idx+1) * R) with R = 2^(G-2d-1).
    const long range_bits = G - 2L * d - 1;  // >= 7 by construction
    const BigInt R = pow2z(range_bits);
    const BigInt S = bit_ceil_z(d + 1);
    if (R % S != 0) throw std::logic_error("carve: residue split does not divide cell range");
    const BigInt Q = R / S;  // cells claimed by this key

    const BigInt q_first = key.sigma.index() * R + i;  // counter residues i mod S, aligned start
    const Rational b = budget(key, cfg);

    // Pieces per claimed cell: honor the configured minimum piece count.
    BigInt s_needed = ceil_div(BigInt(cfg.pieces_per_set), Q);
    if (s_needed < 1) s_needed = 1;
    if (s_needed > 4096) throw std::invalid_argument("carve: pieces_per_set too large for this depth");
    const long s = s_needed.get_si();

    const Rational piece_len = b / (Rational(Q) * Rational(static_cast<long>(s)));
    const Rational cell_slot = g / Rational(static_cast<long>(s));
    const Rational period = Rational(S * pow2z(d + 1)) * g;
    const Rational first_cell_left = Rational(q_first * pow2z(d + 1) + (pow2z(d) - 1)) * g;

    CarvedSet set;
    set.key = key;
    set.kmax = cfg.kmax;
    set.measure = b;
    set.runs.reserve(static_cast<size_t>(s));
    for (long j = 0; j < s; ++j) {
        PieceRun run;
        run.start = first_cell_left + Rational(j) * cell_slot + (cell_slot - piece_len) / 2;
        run.piece_len = piece_len;
        run.period = period;
        run.count = Q;
        set.runs.push_back(std::move(run));
    }
    return set;
}

Rational measure_below(const CarvedSet& set, const Rational& t) {
    if (t < 0 || t > 1) throw std::domain_error("measure_below: t outside [0,1]");
    Rational total = 0;
    for (const PieceRun& run : set.runs) {
        if (t <= run.start) continue;
        BigInt complete;
        if (run.count == 1 || sgn(run.period) == 0) {
            complete = (t >= run.start + run.piece_len) ? 1 : 0;
        } else {
            // pieces with start + a*period + len <= t
            Rational a = (t - run.start - run.piece_len) / run.period;
            complete = rat_floor(a) + 1;
            if (complete < 0) complete = 0;
            if (complete > run.count) complete = run.count;
        }
        total += Rational(complete) * run.piece_len;
        if (complete < run.count) {
            const Rational p_start = run.start + Rational(complete) * run.period;
            if (t > p_start) {
                Rational overlap = t - p_start;
                if (overlap > run.piece_len) overlap = run.piece_len;
                total += overlap;
            }
        }
    }
    return total;
}

Rational measure_in(const CarvedSet& set, const Rational& a, const Rational& b) {
    if (a > b) throw std::invalid_argument("measure_in: a > b");
    return measure_below(set, b) - measure_below(set, a);
}

std::vector<std::pair<Rational, Rational>> expand_pieces(const CarvedSet& set, size_t cap) {
    if (set.piece_count() > static_cast<long>(cap))
        throw std::invalid_argument("expand_pieces: piece count exceeds cap");
    std::vector<std::pair<Rational, Rational>> out;
    for (const PieceRun& run : set.runs) {
        for (BigInt a = 0; a < run.count; ++a) {
            Rational lo = run.start + Rational(a) * run.period;
            out.emplace_back(lo, lo + run.piece_len);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// --- exact run-vs-run intersection ---------------------------------------

struct ZRun {
    BigInt start, len, period, count;
};

// Scale two runs onto a common integer lattice.
std::pair<ZRun, ZRun> to_lattice(const PieceRun& r1, const PieceRun& r2) {
    BigInt den = 1;
    for (const Rational* q :
         {&r1.start, &r1.piece_len, &r1.period, &r2.start, &r2.piece_len, &r2.period}) {
        BigInt l;
        mpz_lcm(l.get_mpz_t(), den.get_mpz_t(), q->get_den().get_mpz_t());
        den = l;
    }
    auto scale = [&den](const Rational& q) -> BigInt {
        return q.get_num() * (den / q.get_den());
    };
    return {ZRun{scale(r1.start), scale(r1.piece_len), scale(r1.period), r1.count},
            ZRun{scale(r2.start), scale(r2.piece_len), scale(r2.period), r2.count}};
}

bool brute_force_intersect(const ZRun& u, const ZRun& v) {
    for (BigInt a = 0; a < u.count; ++a) {
        const BigInt lo1 = u.start + a * u.period;
        const BigInt hi1 = lo1 + u.len;
        for (BigInt b = 0; b < v.count; ++b) {
            const BigInt lo2 = v.start + b * v.period;
            if (lo2 <= hi1 && lo1 <= lo2 + v.len) return true;
        }
    }
    return false;
}

// Does a*P1 - b*P2 = M admit a solution with a in [0,n1), b in [0,n2)?
bool bounded_solution(const BigInt& P1, const BigInt& n1, const BigInt& P2, const BigInt& n2,
                      const BigInt& M) {
    if (P1 == 0 && P2 == 0) return M == 0;
    if (P1 == 0) {  // -b*P2 = M
        if (M % P2 != 0) return false;
        BigInt b = -M / P2;
        return b >= 0 && b < n2;
    }
    if (P2 == 0) {
        if (M % P1 != 0) return false;
        BigInt a = M / P1;
        return a >= 0 && a < n1;
    }
    BigInt gcd, u, v;
    mpz_gcdext(gcd.get_mpz_t(), u.get_mpz_t(), v.get_mpz_t(), P1.get_mpz_t(), P2.get_mpz_t());
    if (M % gcd != 0) return false;
    const BigInt k = M / gcd;
    // a = u*k + t*(P2/g), b = -v*k + t*(P1/g)
    const BigInt a0 = u * k, b0 = -v * k;
    const BigInt da = P2 / gcd, db = P1 / gcd;  // both > 0 here
    // need 0 <= a0 + t*da <= n1-1  and  0 <= b0 + t*db <= n2-1
    BigInt t_lo = ceil_div(-a0, da);
    BigInt t_hi = floor_div(n1 - 1 - a0, da);
    t_lo = std::max(t_lo, ceil_div(-b0, db));
    t_hi = std::min(t_hi, floor_div(n2 - 1 - b0, db));
    return t_lo <= t_hi;
}

bool runs_intersect(const PieceRun& r1, const PieceRun& r2) {
    // Cheap reject on bounding intervals (closed).
    if (r1.last_end() < r2.start || r2.last_end() < r1.start) return false;

    auto [u, v] = to_lattice(r1, r2);
    if (u.count * v.count <= 4096) return brute_force_intersect(u, v);

    // Pieces intersect iff a*P1 - b*P2 lands in [S2-S1-L1, S2-S1+L2].
    const BigInt W1 = v.start - u.start - u.len;
    const BigInt W2 = v.start - u.start + v.len;
    BigInt g;
    if (u.period == 0 && v.period == 0) {
        return !(W1 > 0 || W2 < 0);
    }
    mpz_gcd(g.get_mpz_t(), u.period.get_mpz_t(), v.period.get_mpz_t());
    if (g == 0) g = u.period + v.period;  // one of them is zero
    const BigInt m_lo = ceil_div(W1, g), m_hi = floor_div(W2, g);
    if (m_hi - m_lo > 64)
        throw std::logic_error("runs_intersect: window too wide for lattice solve");
    for (BigInt m = m_lo; m <= m_hi; ++m) {
        if (bounded_solution(u.period, u.count, v.period, v.count, m * g)) return true;
    }
    return false;
}

// Congruence certificate: when both runs are cell-aligned (each piece inside
// one grid cell), disjoint cell progressions imply disjoint sets without
// touching the piece lattice.
struct CellInfo {
    bool aligned = false;
    BigInt first_cell, step, count;
    Rational offset, len;  // within-cell span
};

CellInfo cell_info(const PieceRun& run, const Rational& g) {
    CellInfo info;
    Rational q = run.start / g;
    info.first_cell = rat_floor(q);
    info.offset = run.start - Rational(info.first_cell) * g;
    info.len = run.piece_len;
    if (info.offset + info.len > g) return info;  // piece overflows its cell
    if (run.count > 1) {
        Rational st = run.period / g;
        if (st.get_den() != 1) return info;  // period not a whole number of cells
        info.step = st.get_num();
        if (info.step <= 0) return info;
    } else {
        info.step = 1;
    }
    info.count = run.count;
    info.aligned = true;
    return info;
}

// Do the two integer APs {f1 + a s1} and {f2 + b s2} (a<n1, b<n2) meet?
bool cell_aps_meet(const CellInfo& a, const CellInfo& b) {
    return bounded_solution(a.step, a.count, b.step, b.count, b.first_cell - a.first_cell);
}

}  // namespace

bool sets_intersect(const CarvedSet& a, const CarvedSet& b) {
    const int G = carving_grid_depth(a.kmax);
    const Rational g = pow2(-G);
    const bool same_grid = (a.kmax == b.kmax);
    for (const PieceRun& ra : a.runs) {
        CellInfo ca = same_grid ? cell_info(ra, g) : CellInfo{};
        for (const PieceRun& rb : b.runs) {
            if (ra.last_end() < rb.start || rb.last_end() < ra.start) continue;
            if (same_grid && ca.aligned) {
                CellInfo cb = cell_info(rb, g);
                if (cb.aligned) {
                    if (!cell_aps_meet(ca, cb)) continue;
                    // Cells can coincide: compare within-cell spans (offsets
                    // are constant along a run).
                    if (ca.offset <= cb.offset + cb.len && cb.offset <= ca.offset + ca.len)
                        return true;
                    continue;
                }
            }
            if (runs_intersect(ra, rb)) return true;
        }
    }
    return false;
}

AuditReport audit_path(const Address& tau, const CarvingConfig& cfg) {
    cfg.validate();
    if (tau.depth() > cfg.kmax) throw std::invalid_argument("audit_path: tau deeper than kmax");

    AuditReport report;
    report.tau = tau;
    report.kmax = cfg.kmax;

    std::vector<NodeKey> keys;
    for (int a = 0; a <= tau.depth(); ++a) {
        Address prefix = tau.prefix(a);
        for (int i = 0; i <= a; ++i) keys.emplace_back(prefix, i);
    }
    if (tau.depth() >= 1) {
        Address sib = tau.sibling();
        for (int i = 0; i <= tau.depth(); ++i) keys.emplace_back(sib, i);
    }

    std::vector<CarvedSet> sets;
    sets.reserve(keys.size());
    const Rational cap = pow2(-(cfg.kmax + 1));
    const Rational g = pow2(-carving_grid_depth(cfg.kmax));
    for (const NodeKey& key : keys) {
        CarvedSet set = carve(key, cfg);
        const DyadicInterval I = interval_of(key.sigma);

        Rational total = 0;
        for (const PieceRun& run : set.runs) {
            total += run.total();
            if (run.start < I.lo || run.last_end() > I.hi)
                report.violations.push_back({"containment", key_str(key)});
            if (run.piece_len >= cap)
                report.violations.push_back(
                    {"piece-cap", key_str(key) + " len=" + rat_to_string(run.piece_len)});
            if (!cell_info(run, g).aligned)
                report.violations.push_back({"cell-overflow", key_str(key)});
        }
        if (total != budget(key, cfg))
            report.violations.push_back(
                {"measure", key_str(key) + " total=" + rat_to_string(total)});
        if (total != set.measure)
            report.violations.push_back({"measure", key_str(key) + " recorded measure mismatch"});
        sets.push_back(std::move(set));
    }
    report.sets_checked = sets.size();

    for (size_t x = 0; x < sets.size(); ++x) {
        for (size_t y = x + 1; y < sets.size(); ++y) {
            ++report.pairs_checked;
            bool hit;
            try {
                hit = sets_intersect(sets[x], sets[y]);
            } catch (const std::logic_error&) {
                hit = true;  // undecidable lattice window: treat as violation
            }
            if (hit)
                report.violations.push_back(
                    {"disjoint", key_str(keys[x]) + " vs " + key_str(keys[y])});
        }
    }

    // Free measure of I_tau: subtract ancestors-and-self exactly, then the
    // exact budget total of the strict-descendant keys (all of whose pieces
    // lie inside I_tau by containment).
    const int k = tau.depth();
    const DyadicInterval I = interval_of(tau);
    Rational used = 0;
    for (int a = 0; a <= k; ++a) {
        Address prefix = tau.prefix(a);
        for (int i = 0; i <= a; ++i)
            used += measure_in(carve(NodeKey(prefix, i), cfg), I.lo, I.hi);
    }
    if (cfg.budget_override) {
        for (int d = k + 1; d <= cfg.kmax; ++d) {
            NodeKey rep(Address::from_index(d, tau.index() * pow2z(d - k)), 0);
            Rational per_depth = 0;
            for (int i = 0; i <= d; ++i)
                per_depth += cfg.budget_override(NodeKey(rep.sigma, i));
            used += Rational(pow2z(d - k)) * per_depth;
        }
    } else {
        used += descendant_budget_below(k, cfg.kmax);
    }
    report.free_measure = I.length() - used;
    report.free_bound = pow2(-k) / 2;
    if (report.free_measure < report.free_bound)
        report.violations.push_back(
            {"free-measure", "free=" + rat_to_string(report.free_measure) +
                                 " bound=" + rat_to_string(report.free_bound)});
    return report;
}

}  // namespace pettis
