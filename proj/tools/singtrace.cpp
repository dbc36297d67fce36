// singtrace: command-line front end.
//
// Exit codes: 0 all checks pass or agree, 1 disagreement or failed property,
// 2 invalid input, 3 inconclusive.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "singtrace/dixmier.hpp"
#include "singtrace/errors.hpp"
#include "singtrace/io.hpp"
#include "singtrace/matrix_lab.hpp"
#include "singtrace/spectral_flow.hpp"
#include "singtrace/suite.hpp"
#include "singtrace/tauberian.hpp"
#include "singtrace/toeplitz.hpp"

using namespace singtrace;

namespace {

struct Common {
    double tol = 0.0;  // 0 = command default
    std::uint64_t seed = 1;
    std::string csv, out;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> v;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) v.push_back(item);
    return v;
}

double tol_or(const Common& c, double fallback) {
    if (c.tol < 0 || (c.tol == 0 && fallback <= 0)) throw InvalidInput("--tol must be positive");
    return c.tol > 0 ? c.tol : fallback;
}

std::string timestamp() {
    std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

// report goes to stdout and, with --out, to a file headed by the run time
void emit(const Common& c, const std::string& command, const std::string& body, const CsvTable* table) {
    std::ostringstream head;
    head << "singtrace " << command << "  seed " << c.seed << "\n";
    std::cout << head.str() << body;
    if (!c.out.empty()) {
        std::ofstream f(c.out);
        if (!f) throw InvalidInput("cannot write " + c.out);
        f << head.str() << "generated " << timestamp() << "\n" << body;
    }
    if (table && !c.csv.empty()) table->write(c.csv);
}

std::string band_text(const LimitBand& b) {
    std::ostringstream os;
    if (b.converged)
        os << "converged " << format_number(*b.value) << " (width " << format_number(b.band_width) << ")";
    else
        os << "band [" << format_number(b.liminf_est) << ", " << format_number(b.limsup_est) << "]";
    return os.str();
}

int run_dixmier(const Common& c, const std::string& model, const std::string& routes, double p, double stretch,
                bool weighted) {
    auto m = load_model(model);
    AgreeOptions opt;
    opt.stretch = stretch;
    opt.weighted = weighted;
    if (!routes.empty() && routes != "all") {
        opt.routes.clear();
        for (const auto& r : split_list(routes)) opt.routes.push_back(route_from_string(r));
    }
    auto rep = agree(m, p, tol_or(c, 5e-3), opt);
    std::ostringstream os;
    os << "model " << m.describe() << "  p " << format_number(p) << "  tol " << format_number(rep.tolerance)
       << "\nanchor dixmier-routes-agree\n";
    for (const auto& rr : rep.routes) {
        os << "  " << to_string(rr.route) << ": ";
        if (!rr.error.empty())
            os << "error: " << rr.error;
        else
            os << band_text(rr.band) << "  " << rr.grid_spec;
        os << "\n";
    }
    os << (rep.agreed ? "routes agree" : "routes disagree");
    if (rep.consensus_value) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", *rep.consensus_value);
        os << ", consensus " << buf;
    } else if (rep.agreed) {
        os << ", no route converged (bands overlap)";
    }
    os << "\n";
    auto table = trace_report_table(rep, c.seed, "dixmier-routes-agree");
    emit(c, "dixmier", os.str(), &table);
    if (!rep.agreed) return 1;
    return rep.all_converged() ? 0 : 3;
}

int run_karamata(const Common& c, const std::string& beta) {
    auto m = load_measure(beta);
    auto rep = karamata_compare(m, tol_or(c, 1e-3));
    std::ostringstream os;
    os << "measure " << m.describe() << "\nanchor abel-cesaro-karamata\n"
       << "  h(r)/r: " << band_text(rep.band_h) << (rep.h_unbounded ? " (unbounded)" : "") << "\n"
       << "  beta(t)/t: " << band_text(rep.band_beta) << (rep.beta_unbounded ? " (unbounded)" : "") << "\n";
    for (const auto& t : rep.tags) os << "  tag " << t << "\n";
    os << (rep.consistent ? "consistent" : "inconsistent") << "\n";
    auto table = karamata_table(rep, c.seed, "abel-cesaro-karamata");
    emit(c, "karamata", os.str(), &table);
    if (!rep.consistent) return 1;
    return rep.band_h.converged && rep.band_beta.converged ? 0 : 3;
}

int run_matrixlab(const Common& c, int trials, int dim, const std::string& checks, const std::string& dump,
                  const std::string& model) {
    std::vector<TrialCheck> which;
    for (const auto& s : split_list(checks)) {
        if (s == "loewner" || s == "all") which.push_back(TrialCheck::loewner);
        if (s == "singular" || s == "all") which.push_back(TrialCheck::singular);
        if (s != "loewner" && s != "singular" && s != "all") throw InvalidInput("unknown check \"" + s + "\"");
    }
    if (which.empty()) throw InvalidInput("no checks selected");
    if (dim < 1 || dim > 64) throw InvalidInput("--dim must be in [1, 64]");
    CsvTable table({"check", "trials", "checks", "violations", "worst_ratio"}, c.seed);
    std::ostringstream os;
    os << "root seed " << c.seed << "  dim " << dim << "\n";
    bool ok = true;
    for (std::size_t k = 0; k < which.size(); ++k) {
        TrialOptions t;
        t.seed = c.seed;
        t.trials = trials;
        t.dim = dim;
        t.check = which[k];
        if (!dump.empty()) t.dump_path = which.size() > 1 ? dump + "." + std::to_string(k) : dump;
        auto rep = run_trials(t);
        const char* name = which[k] == TrialCheck::loewner ? "loewner" : "singular";
        table.add_row("operator-order-inequalities", {name, std::to_string(rep.trials), std::to_string(rep.checks),
                                                      std::to_string(rep.violations), format_number(rep.worst_ratio)});
        os << "  " << name << ": " << rep.checks << " checks, " << rep.violations << " violations, worst min_eig/scale "
           << format_number(rep.worst_ratio) << "\n";
        ok = ok && rep.violations == 0;
    }
    if (!model.empty()) {
        auto j = read_json(model);
        if (!j.contains("weight_expression")) throw InvalidInput("compression model needs weight_expression");
        auto b = Expression::parse(j["weight_expression"].get<std::string>());
        j.erase("weight_expression");
        auto m = model_from_json(j);
        auto rep = compression_residue_compare(b, m, default_s_grid(), tol_or(c, 1e-3));
        table.add_row("compression-residue", {"compression_gap", "", "", "", rep.band.value ? format_number(*rep.band.value) : ""});
        os << "  compression gap: " << band_text(rep.band) << "\n";
        ok = ok && rep.band.converged && std::fabs(*rep.band.value) <= tol_or(c, 1e-3);
    }
    emit(c, "matrixlab", os.str(), &table);
    return ok ? 0 : 1;
}

int run_sf(const Common& c, const std::string& scenario, bool lattice, int K, int n, double p,
           const std::string& methods) {
    SfScenario s;
    if (!scenario.empty()) {
        s = load_scenario(scenario);
    } else if (lattice) {
        s.path = OperatorPath::lattice(K, n);
    } else {
        throw InvalidInput("sf needs --scenario or --lattice");
    }
    if (p > 0) s.options.p = p;
    std::vector<std::string> m = split_list(methods);
    auto wants = [&](const char* name) {
        return std::find(m.begin(), m.end(), "all") != m.end() || std::find(m.begin(), m.end(), name) != m.end();
    };
    for (const auto& x : m)
        if (x != "all" && x != "crossings" && x != "partition" && x != "integral" && x != "zeta")
            throw InvalidInput("unknown method \"" + x + "\"");
    const auto& path = s.path;
    double zeta_tol = tol_or(c, s.options.zeta_tol);
    CsvTable table({"method", "value", "detail"}, c.seed);
    std::ostringstream os;
    os << "path " << path.describe() << "\nanchor spectral-flow-formulas\n";
    std::optional<double> ref;
    bool ok = true;
    auto compare = [&](double v, double tol) {
        if (!ref) ref = v;
        else ok = ok && std::fabs(v - *ref) <= tol;
    };
    if (wants("crossings")) {
        int v = sf_crossings(path, uniform_samples(s.options.samples));
        table.add_row("spectral-flow-formulas", {"crossings", std::to_string(v), ""});
        os << "  crossings: " << v << "\n";
        compare(v, 0.0);
    }
    if (wants("partition")) {
        int v = sf_partition(path, uniform_samples(s.options.partition));
        table.add_row("spectral-flow-formulas", {"partition", std::to_string(v), ""});
        os << "  partition: " << v << "\n";
        compare(v, 0.0);
    }
    if (wants("integral")) {
        auto r = sf_integral(path, s.options.p);
        bool applies = path.kind() == PathKind::lattice || path.has_unitary();
        table.add_row("spectral-flow-formulas",
                      {"integral", format_number(r.value),
                       "p=" + format_number(s.options.p) + " nodes=" + std::to_string(r.nodes) + (applies ? "" : " not-unitary")});
        os << "  integral (p=" << format_number(s.options.p) << "): " << format_number(r.value)
           << (applies ? "" : "  (path not generated by a unitary; not compared)") << "\n";
        if (applies) compare(r.value, s.options.integral_tol);
    }
    if (wants("zeta") && path.kind() == PathKind::lattice) {
        auto z = sf_zeta(path, zeta_tol);
        table.add_row("spectral-flow-formulas",
                      {"zeta", z.band.value ? format_number(*z.band.value) : "",
                       "band=[" + format_number(z.band.liminf_est) + ";" + format_number(z.band.limsup_est) + "]"});
        os << "  zeta: " << band_text(z.band) << "\n";
        if (!z.band.converged) {
            emit(c, "sf", os.str(), &table);
            return 3;
        }
        compare(*z.band.value, zeta_tol);
    }
    os << (ok ? "methods agree" : "methods disagree") << "\n";
    emit(c, "sf", os.str(), &table);
    return ok ? 0 : 1;
}

int run_toeplitz(const Common& c, const std::string& symbol, int N) {
    auto u = load_symbol(symbol);
    bool unitary = true;
    for (const auto& x : u.samples(kCircleSamples)) unitary = unitary && std::fabs(std::abs(x) - 1) <= 1e-10;
    int w = winding_number(u);
    Symbol v = unitary ? u : u.unitarized();
    double tol = tol_or(c, 5e-3);
    double li = trace_formula_index(v);
    auto nk = truncated_near_kernel(u, N);
    auto z = zeta_index(v, tol);
    CsvTable table({"quantity", "value", "expected", "detail"}, c.seed);
    const std::string a = "toeplitz-index-formulas";
    table.add_row(a, {"winding", std::to_string(w), "", unitary ? "" : "unitarized"});
    table.add_row(a, {"trace_formula_index", format_number(li), std::to_string(-w), ""});
    table.add_row(a, {"near_kernel", std::to_string(nk.count), std::to_string(std::abs(w)),
                      "N=" + std::to_string(N) + " count_2N=" + std::to_string(nk.count_2N)});
    table.add_row(a, {"zeta_index", z.band.value ? format_number(*z.band.value) : "", std::to_string(-w),
                      "band=[" + format_number(z.band.liminf_est) + ";" + format_number(z.band.limsup_est) + "]"});
    std::ostringstream os;
    os << "symbol " << u.describe() << (unitary ? "" : "  (unitarized)") << "\nanchor " << a << "\n"
       << "  winding: " << w << "\n  trace formula index: " << format_number(li) << "\n  near kernel: " << nk.count
       << " at N=" << N << ", " << nk.count_2N << " at N=" << 2 * N << "\n  zeta index: " << band_text(z.band) << "\n";
    bool ok = std::fabs(li + w) <= 1e-8 && nk.count == std::abs(w);
    if (!z.band.converged) {
        emit(c, "toeplitz", os.str(), &table);
        return 3;
    }
    ok = ok && std::fabs(*z.band.value + w) <= tol;
    os << (ok ? "index formulas agree" : "index formulas disagree") << "\n";
    emit(c, "toeplitz", os.str(), &table);
    return ok ? 0 : 1;
}

int run_suite_cmd(const Common& c, double tol_scale, const std::string& data, const std::string& only) {
    SuiteOptions o;
    o.seed = c.seed;
    if (!(tol_scale > 0)) throw InvalidInput("--tol-scale must be positive");
    o.tol_scale = tol_scale;
    if (!data.empty()) o.data_dir = data;
    for (const auto& s : split_list(only)) {
        try {
            o.only.push_back(std::stoi(s));
        } catch (const std::exception&) {
            throw InvalidInput("--only takes criterion numbers");
        }
        if (o.only.back() < 1 || o.only.back() > kCriteria) throw InvalidInput("criterion out of range: " + s);
    }
    auto rep = run_suite(o);
    std::ostringstream os;
    os << rep.text();
    int passed = 0;
    for (const auto& k : rep.criteria) passed += k.pass();
    os << passed << "/" << rep.criteria.size() << " criteria pass in " << format_number(rep.seconds) << " s\n";
    auto table = rep.table(c.seed);
    emit(c, "suite", os.str(), &table);
    for (const auto& k : rep.criteria)
        if (k.error_code == 2) return 2;
    return rep.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Singular traces, spectral flow and Toeplitz index checks"};
    app.require_subcommand(1);
    Common c;
    auto common = [&c](CLI::App* sub) {
        sub->add_option("--tol", c.tol, "tolerance");
        sub->add_option("--seed", c.seed, "root seed");
        sub->add_option("--csv", c.csv, "CSV output path");
        sub->add_option("--out", c.out, "report output path");
    };

    std::string model, routes = "all";
    double p_dix = 1.0, stretch = 5.0;
    bool weighted = false;
    auto* dix = app.add_subcommand("dixmier", "Dixmier trace by several routes");
    common(dix);
    dix->add_option("--model", model, "model JSON")->required();
    dix->add_option("--routes", routes, "partial_sum,cutoff,stretched_cutoff,zeta,heat or all");
    dix->add_option("--p", p_dix, "summability exponent");
    dix->add_option("--stretch", stretch, "stretch constant of the stretched cutoff");
    dix->add_flag("--weighted", weighted, "use the model's weight");

    std::string beta;
    auto* kar = app.add_subcommand("karamata", "Abel vs Cesaro means of a Stieltjes measure");
    common(kar);
    kar->add_option("--beta", beta, "measure JSON")->required();

    int trials = 1000, dim = 8;
    std::string checks = "all", dump, lab_model;
    auto* lab = app.add_subcommand("matrixlab", "randomized operator inequality trials");
    common(lab);
    lab->add_option("--trials", trials, "trials per check");
    lab->add_option("--dim", dim, "matrix dimension");
    lab->add_option("--methods", checks, "loewner,singular or all");
    lab->add_option("--dump", dump, "failure dump JSON path");
    lab->add_option("--model", lab_model, "diagonal model with weight_expression for the compression residue");

    std::string scenario, methods = "all";
    bool lattice = false;
    int K = 2000, n = 1;
    double p_sf = 0.0;
    auto* sf = app.add_subcommand("sf", "spectral flow by several methods");
    common(sf);
    sf->add_option("--scenario", scenario, "scenario JSON");
    sf->add_flag("--lattice", lattice, "lattice shift path");
    sf->add_option("--K", K, "lattice truncation");
    sf->add_option("--n", n, "lattice shift");
    sf->add_option("--p", p_sf, "integral exponent, 1 < p < 2");
    sf->add_option("--methods", methods, "crossings,partition,integral,zeta or all");

    std::string symbol;
    int N = 512;
    auto* tp = app.add_subcommand("toeplitz", "Toeplitz index by several formulas");
    common(tp);
    tp->add_option("--symbol", symbol, "symbol JSON")->required();
    tp->add_option("--N", N, "truncation size (power of two >= 64)");

    double tol_scale = 1.0;
    std::string data, only;
    auto* su = app.add_subcommand("suite", "run the acceptance criteria");
    common(su);
    su->add_option("--tol-scale", tol_scale, "multiply every tolerance");
    su->add_option("--data", data, "data directory");
    su->add_option("--only", only, "comma-separated criterion numbers");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*dix) return run_dixmier(c, model, routes, p_dix, stretch, weighted);
        if (*kar) return run_karamata(c, beta);
        if (*lab) return run_matrixlab(c, trials, dim, checks, dump, lab_model);
        if (*sf) return run_sf(c, scenario, lattice, K, n, p_sf, methods);
        if (*tp) return run_toeplitz(c, symbol, N);
        if (*su) return run_suite_cmd(c, tol_scale, data, only);
    } catch (const std::exception& e) {
        int code = exit_code_for(e);
        std::cerr << "singtrace: " << e.what() << "\n";
        return code;
    }
    return 2;
}
