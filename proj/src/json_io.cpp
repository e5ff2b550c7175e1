#include "pettis/json_io.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pettis {

namespace {

std::string approx(const Rational& r) {
    std::ostringstream os;
    os.precision(17);
    os << rat_to_double(r);
    return os.str();
}

}  // namespace

Json selector_to_json(const Selector& s) {
    Json j;
    if (s.kind() == Selector::Kind::slope) {
        j["type"] = "slope";
        j["t"] = rat_to_string(s.slope_value());
    } else {
        j["type"] = "table";
        j["values"] = s.table_values();
    }
    return j;
}

Selector selector_from_json(const Json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "slope") return Selector::slope(parse_rational(j.at("t").get<std::string>()));
    if (type == "table") return Selector::table(j.at("values").get<std::vector<int>>());
    throw std::invalid_argument("selector_from_json: unknown type '" + type + "'");
}

Json function_to_json(const BasicFunction& f) {
    Json j;
    j["kmax"] = f.kmax;
    Json scheme;
    if (const auto* fn = std::get_if<FnScheme>(&f.scheme)) {
        scheme["type"] = "fn";
        scheme["selector"] = selector_to_json(fn->selector);
    } else if (const auto* comb = std::get_if<CombinedScheme>(&f.scheme)) {
        scheme["type"] = "combined";
        Json terms = Json::array();
        for (const auto& [w, sel] : comb->terms) {
            Json term;
            term["weight"] = rat_to_string(w);
            term["selector"] = selector_to_json(sel);
            terms.push_back(std::move(term));
        }
        scheme["terms"] = std::move(terms);
    } else {
        const auto& ex = std::get<ExplicitScheme>(f.scheme);
        scheme["type"] = "explicit";
        Json coeffs = Json::array();
        for (const auto& [key, sq] : ex.coeffs) {
            Json c;
            c["sigma"] = key.sigma.to_string();
            c["i"] = key.level_index;
            c["sign"] = sq.sign;
            c["square"] = rat_to_string(sq.square);
            coeffs.push_back(std::move(c));
        }
        scheme["coeffs"] = std::move(coeffs);
    }
    j["scheme"] = std::move(scheme);
    if (f.restriction) j["restriction"] = f.restriction->to_string();
    return j;
}

BasicFunction function_from_json(const Json& j) {
    const int kmax = j.at("kmax").get<int>();
    const Json& scheme = j.at("scheme");
    const std::string type = scheme.at("type").get<std::string>();
    BasicFunction f;
    if (type == "fn") {
        f = make_fn(selector_from_json(scheme.at("selector")), kmax);
    } else if (type == "combined") {
        std::vector<Rational> weights;
        std::vector<Selector> selectors;
        for (const Json& term : scheme.at("terms")) {
            weights.push_back(parse_rational(term.at("weight").get<std::string>()));
            selectors.push_back(selector_from_json(term.at("selector")));
        }
        f = combine(weights, selectors, kmax);
    } else if (type == "explicit") {
        std::map<NodeKey, SignedSquare> coeffs;
        for (const Json& c : scheme.at("coeffs")) {
            NodeKey key(Address::from_string(c.at("sigma").get<std::string>()),
                        c.at("i").get<int>());
            coeffs.emplace(std::move(key),
                           SignedSquare(c.at("sign").get<int>(),
                                        parse_rational(c.at("square").get<std::string>())));
        }
        f = make_explicit(std::move(coeffs), kmax);
    } else {
        throw std::invalid_argument("function_from_json: unknown scheme type '" + type + "'");
    }
    if (j.contains("restriction"))
        f = restrict_fn(f, Address::from_string(j.at("restriction").get<std::string>()));
    return f;
}

Json carved_set_to_json(const CarvedSet& set, size_t piece_cap) {
    Json j;
    j["sigma"] = set.key.sigma.to_string();
    j["i"] = set.key.level_index;
    Json pieces = Json::array();
    for (const auto& [lo, hi] : expand_pieces(set, piece_cap))
        pieces.push_back(Json::array({rat_to_string(lo), rat_to_string(hi)}));
    j["pieces"] = std::move(pieces);
    j["measure"] = rat_to_string(set.measure);
    return j;
}

Json integral_vector_to_json(const IntegralVector& v) {
    Json j;
    Json aggs = Json::array();
    for (const auto& [key, agg] : v.aggregates) {
        if (agg.count == 0) continue;  // bookkeeping entries, no mass
        Json a;
        a["level"] = key.first;
        a["index"] = key.second;
        a["count"] = agg.count.get_str();
        a["sign"] = agg.full.sign;
        a["square"] = rat_to_string(agg.full.square);
        aggs.push_back(std::move(a));
    }
    j["aggregates"] = std::move(aggs);
    Json partials = Json::array();
    for (const auto& [key, sq] : v.partials) {
        Json p;
        p["sigma"] = key.sigma.to_string();
        p["i"] = key.level_index;
        p["sign"] = sq.sign;
        p["square"] = rat_to_string(sq.square);
        partials.push_back(std::move(p));
    }
    j["partials"] = std::move(partials);
    const Rational nsq = norm_sq(v);
    j["norm_sq"] = rat_to_string(nsq);
    j["norm_approx"] = std::sqrt(rat_to_double(nsq));
    return j;
}

Json audit_report_to_json(const AuditReport& r) {
    Json j;
    j["tau"] = r.tau.to_string();
    j["kmax"] = r.kmax;
    j["status"] = r.pass() ? "pass" : "fail";
    Json v = Json::array();
    for (const auto& violation : r.violations) {
        Json item;
        item["kind"] = violation.kind;
        item["detail"] = violation.detail;
        v.push_back(std::move(item));
    }
    j["violations"] = std::move(v);
    j["free_measure"] = rat_to_string(r.free_measure);
    j["free_bound"] = rat_to_string(r.free_bound);
    j["sets_checked"] = r.sets_checked;
    j["pairs_checked"] = r.pairs_checked;
    return j;
}

Json ad_report_to_json(const AdReport& r) {
    Json j;
    j["status"] = r.pass ? "pass" : "fail";
    Json pairs = Json::array();
    for (const auto& pr : r.pairs) {
        Json p;
        p["s"] = rat_to_string(pr.s);
        p["t"] = rat_to_string(pr.t);
        p["bound"] = pr.bound;
        p["collisions"] = pr.collisions;
        p["bound_reached"] = pr.bound_reached;
        p["status"] = pr.pass ? "pass" : "fail";
        pairs.push_back(std::move(p));
    }
    j["pairs"] = std::move(pairs);
    return j;
}

Json pettis_certificate_to_json(const PettisCertificate& c) {
    Json j;
    j["kind"] = c.kind == CertificateKind::l2_sum ? "l2-sum" : "block-sum";
    j["partial"] = rat_to_string(c.partial);
    j["partial_approx"] = approx(c.partial);
    if (c.tail_bound) j["tail_bound"] = rat_to_string(*c.tail_bound);
    if (c.kind == CertificateKind::block_sum) {
        j["block_sum_lo"] = rat_to_string(c.block_sum.lo);
        j["block_sum_hi"] = rat_to_string(c.block_sum.hi);
    }
    j["verdict"] = c.verdict;
    return j;
}

Json bochner_report_to_json(const BochnerReport& r) {
    Json j;
    j["threshold"] = rat_to_string(r.threshold);
    Json sums = Json::array();
    for (size_t k = 0; k < r.partial_sums.size(); ++k) {
        Json s;
        s["K"] = k;
        s["lo"] = rat_to_string(r.partial_sums[k].lo);
        s["hi"] = rat_to_string(r.partial_sums[k].hi);
        s["approx"] = approx(r.partial_sums[k].lo);
        sums.push_back(std::move(s));
    }
    j["partial_sums"] = std::move(sums);
    if (r.diverged_at) j["diverged_at"] = *r.diverged_at;
    j["verdict"] = r.diverged_at ? "divergent-at-truncation" : "below-threshold";
    return j;
}

Json backend_to_json(const NormBackend& b) {
    Json j;
    j["kind"] = b.kind_name();
    if (b.kind == NormBackend::Kind::lp) j["p"] = b.p;
    j["tolerance"] = b.tolerance;
    j["seed"] = b.seed;
    j["k_estimate"] = b.k_estimate;
    j["k_provenance"] = b.k_provenance;
    return j;
}

NormBackend backend_from_json(const Json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "l2-exact" || kind == "l2") return NormBackend::l2();
    if (kind == "lp")
        return NormBackend::lp_float(j.at("p").get<double>(),
                                     j.value("tolerance", 1e-9), j.value("seed", 1ULL));
    throw std::invalid_argument("backend_from_json: unknown kind '" + kind + "'");
}

Json schedule_to_json(const BlockSchedule& s) {
    Json j;
    j["cuts"] = s.cuts;
    Json u = Json::array();
    for (const auto& usq : s.u_sq) u.push_back(rat_to_string(usq));
    j["u_sq"] = std::move(u);
    j["growth_certified"] = s.growth_certified;
    return j;
}

Json lemma_report_to_json(const LemmaReport& r) {
    Json j;
    j["lemma"] = r.lemma;
    Json params;
    for (const auto& [k, v] : r.params) params[k] = v;
    j["params"] = std::move(params);
    j["status"] = r.pass ? "pass" : "fail";
    j["counterexamples"] = r.counterexamples;
    Json steps = Json::array();
    for (const auto& s : r.steps) {
        Json step;
        step["name"] = s.name;
        step["lhs_sq"] = s.lhs;
        step["rhs_lo"] = s.rhs;
        if (!s.note.empty()) step["note"] = s.note;
        steps.push_back(std::move(step));
    }
    j["steps"] = std::move(steps);
    j["ms"] = r.ms;
    return j;
}

LemmaParams lemma_params_from_json(const Json& j) {
    LemmaParams p;
    p.kmax = j.value("kmax", p.kmax);
    p.pieces_per_set = j.value("pieces_per_set", p.pieces_per_set);
    if (j.contains("weights"))
        for (const Json& w : j.at("weights")) p.weights.push_back(parse_rational(w.get<std::string>()));
    if (j.contains("slopes"))
        for (const Json& t : j.at("slopes")) p.slopes.push_back(parse_rational(t.get<std::string>()));
    p.tau_depth_cap = j.value("tau_depth_cap", p.tau_depth_cap);
    p.samples = j.value("samples", p.samples);
    p.seed = j.value("seed", p.seed);
    p.precision_bits = j.value("precision_bits", p.precision_bits);
    p.max_precision_bits = j.value("max_precision_bits", p.max_precision_bits);
    p.backend = j.value("backend", p.backend);
    p.lp_p = j.value("p", p.lp_p);
    p.backend_tolerance = j.value("tolerance", p.backend_tolerance);
    if (j.contains("cuts")) p.cuts = j.at("cuts").get<std::vector<long>>();
    p.block = j.value("block", p.block);
    p.dim_factor = j.value("dim_factor", p.dim_factor);
    p.frame_validate = j.value("frame_validate", p.frame_validate);
    return p;
}

Json blowup_witness_to_json(const BlowupWitness& w) {
    Json j;
    j["mode"] = w.mode;
    j["x"] = rat_to_string(w.x);
    j["M"] = rat_to_string(w.M);
    j["scale"] = rat_to_string(w.scale);
    j["i0"] = w.i0;
    j["l"] = w.l;
    j["level"] = w.level;
    j["tau"] = w.tau.to_string();
    j["delta"] = rat_to_string(w.delta);
    Json samples = Json::array();
    for (const auto& s : w.samples) {
        Json item;
        item["h"] = rat_to_string(s.h);
        item["depth"] = s.depth;
        item["tau"] = s.tau.to_string();
        item["quotient_sq"] = rat_to_string(s.quotient_sq);
        item["quotient_approx"] = std::sqrt(rat_to_double(s.quotient_sq));
        item["pass"] = s.pass;
        item["window_norm_sq"] = rat_to_string(s.window_norm_sq);
        item["tau_norm_sq"] = rat_to_string(s.tau_norm_sq);
        item["tau_restricted_sq"] = rat_to_string(s.tau_restricted_sq);
        item["lower_sq_lo"] = rat_to_string(s.lower_sq.lo);
        item["lower_sq_hi"] = rat_to_string(s.lower_sq.hi);
        samples.push_back(std::move(item));
    }
    j["samples"] = std::move(samples);
    Json steps = Json::array();
    for (const auto& s : w.steps) {
        Json step;
        step["name"] = s.name;
        step["lhs_sq"] = s.lhs;
        step["rhs_lo"] = s.rhs;
        if (!s.note.empty()) step["note"] = s.note;
        steps.push_back(std::move(step));
    }
    j["steps"] = std::move(steps);
    j["verdict"] = w.verdict;
    return j;
}

Json quotient_rows_to_json(const std::vector<QuotientRow>& rows) {
    Json arr = Json::array();
    for (const auto& row : rows) {
        Json r;
        r["x"] = rat_to_string(row.x);
        r["h"] = rat_to_string(row.h);
        r["quot_sq_lo"] = rat_to_string(row.quot.lo * row.quot.lo);
        r["quot_sq_hi"] = rat_to_string(row.quot.hi * row.quot.hi);
        r["quot_sq_exact"] = rat_to_string(row.quot_sq);
        r["quot_approx"] = approx(row.quot.lo);
        arr.push_back(std::move(r));
    }
    return arr;
}

std::string quotient_rows_to_csv(const std::vector<QuotientRow>& rows) {
    std::ostringstream os;
    os << "x,h,quot_sq_lo,quot_sq_hi,quot_sq_exact\n";
    for (const auto& row : rows)
        os << rat_to_string(row.x) << "," << rat_to_string(row.h) << ","
           << rat_to_string(row.quot.lo * row.quot.lo) << ","
           << rat_to_string(row.quot.hi * row.quot.hi) << "," << rat_to_string(row.quot_sq)
           << "\n";
    return os.str();
}

}  // namespace pettis
