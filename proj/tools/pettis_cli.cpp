// Command-line surface: construct carvings and functions, evaluate
// primitives, run the property suite, and reproduce the blow-up witness.
// Exit codes: 0 pass, 1 property violation, 2 usage error.

#include "pettis/json_io.hpp"
#include "pettis/prng.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace pettis;

constexpr int kExitPass = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

struct GlobalOpts {
    int kmax = 10;
    uint64_t seed = 1;
    std::string backend = "l2";
    int precision_bits = 64;
    std::string out;
    std::string format = "json";
};

void emit(const GlobalOpts& g, const std::string& text) {
    if (g.out.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::ofstream file(g.out);
    if (!file) throw std::runtime_error("cannot open output file " + g.out);
    file << text << "\n";
}

void emit_json(const GlobalOpts& g, const Json& j) { emit(g, j.dump(2)); }

Json load_json(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw std::invalid_argument("cannot open " + path);
    try {
        Json j;
        file >> j;
        return j;
    } catch (const std::exception& e) {
        throw std::invalid_argument("bad JSON in " + path + ": " + e.what());
    }
}

std::vector<Rational> parse_rational_list(const std::string& csv) {
    std::vector<Rational> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(parse_rational(item));
    }
    return out;
}

// Combination weights/selectors of a function config (blow-up input).
std::pair<std::vector<Rational>, std::vector<Selector>> function_terms(const BasicFunction& f) {
    if (const auto* fn = std::get_if<FnScheme>(&f.scheme))
        return {{Rational(1)}, {fn->selector}};
    if (const auto* comb = std::get_if<CombinedScheme>(&f.scheme)) {
        std::vector<Rational> w;
        std::vector<Selector> s;
        for (const auto& [wi, sel] : comb->terms) {
            w.push_back(wi);
            s.push_back(sel);
        }
        return {w, s};
    }
    throw std::invalid_argument("blowup requires a selector-scheme function config");
}

int run(int argc, char** argv) {
    CLI::App app{"exact construction and verification of Pettis step functions"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name
    GlobalOpts g;
    app.add_option("--kmax", g.kmax, "truncation depth");
    app.add_option("--seed", g.seed, "deterministic seed");
    app.add_option("--backend", g.backend, "norm backend: l2 | lp");
    app.add_option("--precision-bits", g.precision_bits, "enclosure precision");
    app.add_option("--out", g.out, "output path (default stdout)");
    app.add_option("--format", g.format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}));

    // construct
    auto* construct = app.add_subcommand("construct", "emit carving or function JSON");
    std::string c_sigma;
    int c_index = 0;
    bool c_have_index = false;
    int c_pieces = 1;
    std::string c_slopes, c_weights;
    construct->add_option("--sigma", c_sigma, "address of the carved set");
    construct->add_option("--i", c_index, "level index of the carved set")
        ->each([&](const std::string&) { c_have_index = true; });
    construct->add_option("--pieces", c_pieces, "minimum pieces per carved set");
    construct->add_option("--slopes", c_slopes, "comma list of slopes for a function config");
    construct->add_option("--weights", c_weights, "comma list of weights");

    // integrate
    auto* integrate = app.add_subcommand("integrate", "primitive value F(t) as a component vector");
    std::string i_cfg, i_at;
    integrate->add_option("--f", i_cfg, "function config JSON path")->required();
    integrate->add_option("--at", i_at, "t in [0,1], rational")->required();

    // verify
    auto* verify = app.add_subcommand("verify", "run one property check");
    std::string v_lemma, v_params;
    verify->add_option("--lemma", v_lemma, "property id (3.1-2, 3.1-3, 3.2, 3.3, 4.2, 4.3, 4.4, 4.5)")
        ->required();
    verify->add_option("--params", v_params, "params JSON path");

    // blowup
    auto* blowup = app.add_subcommand("blowup", "difference-quotient blow-up witness");
    std::string b_cfg, b_x = "0", b_M = "8", b_mode = "l2", b_cuts;
    int b_samples = 20;
    blowup->add_option("--f", b_cfg, "function config JSON path")->required();
    blowup->add_option("--x", b_x, "anchor point, rational");
    blowup->add_option("--M", b_M, "quotient target, rational");
    blowup->add_option("--mode", b_mode, "l2 | general")->check(CLI::IsMember({"l2", "general"}));
    blowup->add_option("--samples", b_samples, "sampled offsets per witness");
    blowup->add_option("--cuts", b_cuts, "block schedule cut points for general mode (comma list)");

    // family
    auto* family = app.add_subcommand("family", "almost-disjointness of slope selectors");
    bool f_check_ad = false;
    std::string f_ts;
    int f_depth = 100;
    family->add_flag("--check-ad", f_check_ad, "verify pairwise collision bounds");
    family->add_option("--ts", f_ts, "comma list of slopes")->required();
    family->add_option("--depth", f_depth, "levels to enumerate");

    // table
    auto* table = app.add_subcommand("table", "difference-quotient table");
    std::string t_cfg, t_x = "0", t_hmin = "2^-12", t_hmax = "2^-2";
    table->add_option("--f", t_cfg, "function config JSON path")->required();
    table->add_option("--x", t_x, "anchor point");
    table->add_option("--hmin", t_hmin, "smallest offset (e.g. 2^-12)");
    table->add_option("--hmax", t_hmax, "largest offset");

    // audit
    auto* audit = app.add_subcommand("audit", "carving audit along a path");
    std::string a_tau;
    int a_pieces = 1;
    audit->add_option("--tau", a_tau, "path address (0/1 string, empty = root)");
    audit->add_option("--pieces", a_pieces, "minimum pieces per carved set");

    // certify
    auto* certify = app.add_subcommand("certify", "Pettis vs Bochner certificates");
    std::string ce_cfg, ce_threshold = "100";
    certify->add_option("--f", ce_cfg, "function config JSON path")->required();
    certify->add_option("--threshold", ce_threshold, "Bochner divergence threshold");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;  // --help exits clean
    }

    if (construct->parsed()) {
        if (!c_slopes.empty()) {
            auto slopes = parse_rational_list(c_slopes);
            auto weights = c_weights.empty() ? std::vector<Rational>(slopes.size(), Rational(1))
                                             : parse_rational_list(c_weights);
            std::vector<Selector> sels;
            for (const auto& t : slopes) sels.push_back(slope_selector(t));
            emit_json(g, function_to_json(combine(weights, sels, g.kmax)));
            return kExitPass;
        }
        if (!c_sigma.empty() || c_have_index) {
            CarvingConfig cfg{g.kmax, c_pieces, nullptr};
            NodeKey key(Address::from_string(c_sigma), c_index);
            emit_json(g, carved_set_to_json(carve(key, cfg)));
            return kExitPass;
        }
        throw CLI::ValidationError("construct", "need --slopes or --sigma/--i");
    }

    if (integrate->parsed()) {
        BasicFunction f = function_from_json(load_json(i_cfg));
        const Rational t = parse_rational(i_at);
        CarvingConfig cfg{std::max(g.kmax, f.kmax), 1, nullptr};
        emit_json(g, integral_vector_to_json(integral(f, Rational(0), t, cfg)));
        return kExitPass;
    }

    if (verify->parsed()) {
        LemmaParams params;
        if (!v_params.empty()) params = lemma_params_from_json(load_json(v_params));
        if (app.count("--kmax")) params.kmax = g.kmax;
        if (app.count("--seed")) params.seed = g.seed;
        if (app.count("--backend")) params.backend = g.backend;
        if (app.count("--precision-bits")) params.precision_bits = g.precision_bits;
        LemmaReport rep = verify_lemma(v_lemma, params);
        emit_json(g, lemma_report_to_json(rep));
        return rep.pass ? kExitPass : kExitViolation;
    }

    if (blowup->parsed()) {
        BasicFunction f = function_from_json(load_json(b_cfg));
        auto [weights, selectors] = function_terms(f);
        BlowupParams params;
        params.kmax = f.kmax;
        if (app.count("--kmax")) params.kmax = g.kmax;
        params.seed = g.seed;
        params.precision_bits = g.precision_bits;
        params.sample_count = b_samples;
        params.backend = g.backend;
        if (!b_cuts.empty()) {
            std::stringstream ss(b_cuts);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty()) params.cuts.push_back(std::stol(item));
        }
        try {
            BlowupWitness w = blowup_witness(weights, selectors, parse_rational(b_x),
                                             parse_rational(b_M), b_mode, params);
            emit_json(g, blowup_witness_to_json(w));
            return w.verdict == "pass" ? kExitPass : kExitViolation;
        } catch (const std::runtime_error& e) {
            Json j;
            j["status"] = "infeasible";
            j["error"] = e.what();
            emit_json(g, j);
            return kExitViolation;
        }
    }

    if (family->parsed()) {
        auto ts = parse_rational_list(f_ts);
        AdReport rep = verify_ad(ts, f_depth);
        emit_json(g, ad_report_to_json(rep));
        return rep.pass ? kExitPass : kExitViolation;
    }

    if (table->parsed()) {
        BasicFunction f = function_from_json(load_json(t_cfg));
        const Rational x = parse_rational(t_x);
        const Rational hmin = parse_rational(t_hmin), hmax = parse_rational(t_hmax);
        if (hmin <= 0 || hmax < hmin) throw CLI::ValidationError("table", "need 0 < hmin <= hmax");
        std::vector<Rational> hs;
        for (Rational h = hmax; h >= hmin; h /= 2) {
            if (x + h > 1) continue;
            hs.push_back(h);
        }
        CarvingConfig cfg{std::max(g.kmax, f.kmax), 1, nullptr};
        auto rows = quotient_table(f, x, hs, cfg, g.precision_bits);
        if (g.format == "csv")
            emit(g, quotient_rows_to_csv(rows));
        else
            emit_json(g, quotient_rows_to_json(rows));
        return kExitPass;
    }

    if (audit->parsed()) {
        CarvingConfig cfg{g.kmax, a_pieces, nullptr};
        AuditReport rep = audit_path(Address::from_string(a_tau), cfg);
        emit_json(g, audit_report_to_json(rep));
        return rep.pass() ? kExitPass : kExitViolation;
    }

    if (certify->parsed()) {
        BasicFunction f = function_from_json(load_json(ce_cfg));
        Json j;
        j["pettis"] = pettis_certificate_to_json(pettis_check(f));
        j["pettis_blocks"] = pettis_certificate_to_json(pettis_check_blocks(f, g.precision_bits));
        j["bochner"] =
            bochner_report_to_json(bochner_check(f, parse_rational(ce_threshold), g.precision_bits));
        emit_json(g, j);
        return kExitPass;
    }

    return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitViolation;
    }
}
