#include "singtrace/suite.hpp"

#include <chrono>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "singtrace/errors.hpp"
#include "singtrace/matrix_lab.hpp"
#include "singtrace/parallel.hpp"

namespace singtrace {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Builder {
    CriterionResult& r;
    double ts;

    void near(const std::string& name, double value, double expected, double tol) {
        tol *= ts;
        r.checks.push_back({name, std::fabs(value - expected) <= tol, value, expected, tol, false});
    }
    void exact(const std::string& name, double value, double expected) {
        r.checks.push_back({name, value == expected, value, expected, 0.0, false});
    }
    void truth(const std::string& name, bool ok) { r.checks.push_back({name, ok, ok ? 1.0 : 0.0, 1.0, 0.0, false}); }
    void at_most(const std::string& name, double value, double bound) {
        bound *= ts;
        r.checks.push_back({name, value <= bound, value, bound, 0.0, false});
    }
    void runtime(const std::string& name, double seconds, double budget) {
        r.checks.push_back({name, seconds <= budget, seconds, budget, 0.0, true});
    }
};

std::string path_in(const SuiteOptions& o, const std::string& rel) { return o.data_dir + "/" + rel; }

double band_value(const LimitBand& b) { return b.value ? *b.value : std::nan(""); }

void four_routes(const SuiteOptions& o, Builder& c) {
    auto t0 = Clock::now();
    auto rep = agree(load_model(path_in(o, "models/harmonic.json")), 1.0, 5e-3 * o.tol_scale);
    for (const auto& rr : rep.routes) {
        double tol = rr.route == Route::zeta ? 1e-6 : rr.route == Route::heat ? 1e-4 : 5e-3;
        c.truth(std::string(to_string(rr.route)) + " converged", rr.band.converged);
        c.near(std::string(to_string(rr.route)) + " value", band_value(rr.band), 1.0, tol);
    }
    c.truth("routes agree", rep.agreed);
    c.runtime("runtime", since(t0), 10.0);
}

void p_normalization(const SuiteOptions& o, Builder& c) {
    auto m = load_model(path_in(o, "models/sqrt_p2.json"));
    auto z = route_zeta(m, 2.0, 1e-3 * o.tol_scale);
    c.truth("zeta converged", z.raw.converged);
    c.near("raw zeta limit", band_value(z.raw), 2.0, 1e-3);
    auto h = route_heat(m, 2.0, 1e-3 * o.tol_scale);
    c.truth("heat converged", h.value.converged);
    c.near("heat value over Gamma(2)", band_value(h.value), 1.0, 1e-3);
}

void trace_class(const SuiteOptions& o, Builder& c) {
    auto rep = agree(load_model(path_in(o, "models/trace_class.json")), 1.0, 1e-6 * o.tol_scale);
    for (const auto& rr : rep.routes) {
        c.truth(std::string(to_string(rr.route)) + " converged", rr.band.converged);
        c.near(std::string(to_string(rr.route)) + " value", band_value(rr.band), 0.0, 1e-6);
    }
}

void nonmeasurable(const SuiteOptions& o, Builder& c) {
    auto m = load_model(path_in(o, "models/oscillatory.json"));
    auto rep = agree(m, 1.0, 5e-3 * o.tol_scale);
    for (const auto& rr : rep.routes) {
        std::string r = to_string(rr.route);
        c.truth(r + " not converged", rr.error.empty() && !rr.band.converged);
        c.near(r + " band liminf", rr.band.liminf_est, 0.6, 0.02);
        c.near(r + " band limsup", rr.band.limsup_est, 1.4, 0.02);
    }
    bool overlap = true;
    for (const auto& a : rep.routes)
        for (const auto& b : rep.routes) overlap = overlap && a.band.overlaps(b.band);
    c.truth("pairwise band overlap", overlap);

    // F(t)/log(1+t) on u = ln t, far enough out for the iterated mean
    auto u = make_grid({1.0, 1e15, 32});
    std::vector<double> v(u.size());
    parallel_for(u.size(), [&](std::size_t i) {
        XReal t = XReal::exp_of(u[i]);
        double l = u[i] > 40 ? u[i] + std::log1p(std::exp(-u[i])) : std::log1p(std::exp(u[i]));
        v[i] = integral_mu(m, t) / l;
    });
    auto band = limit_band(GridFunction::tabulated(u, v, true), 0.01 * o.tol_scale, BandMethod::cesaro_iterate);
    c.truth("cesaro band converged", band.converged);
    c.near("cesaro band value", band_value(band), 1.0, 0.01);
}

void karamata(const SuiteOptions& o, Builder& c) {
    auto u = load_measure(path_in(o, "measures/unit_jumps.json"));
    double r = 1e6;
    c.at_most("|h(r)/r - beta(r)/r| at r = 1e6", std::fabs(laplace_stieltjes(u, r) / r - beta_at(u, r) / r), 1e-5);
    int consistent = 0;
    for (std::uint64_t k = 0; k < 10; ++k) {
        std::mt19937_64 rng(derive_seed(o.seed, 500 + k));
        std::uniform_real_distribution<double> U(0, 2);
        std::uniform_int_distribution<int> P(1, 24);
        std::vector<double> inc(P(rng));
        for (double& x : inc) x = U(rng);
        auto rep = karamata_compare(StieltjesMeasure::periodic(inc), 1e-3 * o.tol_scale);
        consistent += rep.consistent && rep.band_h.converged && rep.band_beta.converged;
    }
    c.exact("random bounded-increment measures consistent", consistent, 10);
}

void loewner(const SuiteOptions& o, Builder& c) {
    auto t0 = Clock::now();
    for (auto check : {TrialCheck::loewner, TrialCheck::singular}) {
        TrialOptions t;
        t.seed = derive_seed(o.seed, check == TrialCheck::loewner ? 600 : 601);
        t.check = check;
        auto rep = run_trials(t);
        std::string name = check == TrialCheck::loewner ? "operator order" : "singular values";
        c.exact(name + " trials", rep.trials, 1000);
        c.exact(name + " violations", rep.violations, 0);
    }
    c.runtime("runtime", since(t0), 20.0);
}

void compression(const SuiteOptions& o, Builder& c) {
    auto j = read_json(path_in(o, "models/harmonic_sin_weight.json"));
    auto b = Expression::parse(j.at("weight_expression").get<std::string>());
    j.erase("weight_expression");
    auto m = model_from_json(j);
    auto rep = compression_residue_compare(b, m, default_s_grid(), 1e-3 * o.tol_scale);
    c.truth("gap band converged", rep.band.converged);
    c.near("gap limit", band_value(rep.band), 0.0, 1e-3);
    auto p = epsilon_perturbation(b, m);
    c.truth("perturbation exponent >= 1/4", p.exponent >= 0.25);
    c.truth("perturbation fit R^2 >= 0.9", p.r2 >= 0.9);
}

void spectral_flow(const SuiteOptions& o, Builder& c) {
    auto t0 = Clock::now();
    for (int n : {1, 2, 3}) {
        auto L = OperatorPath::lattice(2000, n);
        std::string tag = "n=" + std::to_string(n) + " ";
        c.exact(tag + "crossings", sf_crossings(L, uniform_samples(64)), -n);
        c.exact(tag + "partition", sf_partition(L, uniform_samples(64)), -n);
        c.near(tag + "integral", sf_integral(L, 1.5).value, -n, 0.02);
        auto z = sf_zeta(L, 5e-3 * o.tol_scale);
        c.truth(tag + "zeta converged", z.band.converged);
        c.near(tag + "zeta", band_value(z.band), -n, 5e-3);
    }
    for (double p : {1.1, 1.5, 1.9})
        c.near("ctilde closed form vs quadrature p=" + format_number(p), ctilde_quadrature(p), ctilde(p), 1e-10);
    c.runtime("runtime", since(t0), 30.0);
}

void sweep_stability(const SuiteOptions&, Builder& c) {
    std::vector<double> pg{1.02, 1.1, 1.2, 1.3}, tg = uniform_samples(10);
    std::vector<double> sups;
    for (int K : {500, 1000, 2000}) {
        auto r = uniform_bound_sweep(OperatorPath::lattice(K, 1), 1.0, pg, tg);
        c.truth("K=" + std::to_string(K) + " finite", r.finite);
        sups.push_back(r.sup);
    }
    for (std::size_t i = 0; i < 2; ++i)
        c.near("sup ratio K=" + std::to_string(i ? 1000 : 500) + " vs 2000", sups[i] / sups[2], 1.0, 0.1);
}

void index_chain(const SuiteOptions& o, Builder& c) {
    for (int w = -2; w <= 3; ++w) {
        auto u = load_symbol(path_in(o, "symbols/" + std::string(w < 0 ? "exp_m" : "exp_") + std::to_string(std::abs(w)) +
                                            ".json"));
        std::string tag = "w=" + std::to_string(w) + " ";
        c.exact(tag + "winding", winding_number(u), w);
        c.near(tag + "trace formula index", trace_formula_index(u), -w, 1e-8);
        try {
            auto nk = truncated_near_kernel(u, 512);
            c.exact(tag + "near kernel at N=512", nk.count, std::abs(w));
            c.exact(tag + "near kernel at N=1024", nk.count_2N, std::abs(w));
        } catch (const Inconclusive&) {
            c.truth(tag + "near kernel stable", false);
        }
        auto z = zeta_index(u, 5e-3 * o.tol_scale);
        c.truth(tag + "zeta converged", z.band.converged);
        c.near(tag + "zeta index", band_value(z.band), -w, 5e-3);
    }
    auto g = crossed_trace_check(1.0, [](double t) { return std::exp(-0.5 * t * t); }, {}, {});
    c.at_most("gaussian crossed trace rel_err", g.rel_err, 1e-6);
}

struct Entry {
    const char* title;
    const char* anchor;
    void (*fn)(const SuiteOptions&, Builder&);
};

const Entry kEntries[] = {
    {"four-route Dixmier agreement", "dixmier-routes-agree", four_routes},
    {"p > 1 normalization", "zeta-residue-p-normalization", p_normalization},
    {"trace-class triviality", "trace-class-vanishing", trace_class},
    {"non-measurable band", "non-measurable-band", nonmeasurable},
    {"Karamata comparison", "abel-cesaro-karamata", karamata},
    {"Loewner inequalities", "operator-order-inequalities", loewner},
    {"compression residue", "compression-residue", compression},
    {"spectral flow chain", "spectral-flow-formulas", spectral_flow},
    {"uniform bound stability", "spectral-flow-uniform-bound", sweep_stability},
    {"Toeplitz index chain", "toeplitz-index-formulas", index_chain},
};

}  // namespace

bool CriterionResult::pass() const {
    if (!error.empty() || checks.empty()) return false;
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const InvalidInput*>(&e) || dynamic_cast<const DomainError*>(&e) ||
        dynamic_cast<const NotInIdeal*>(&e) || dynamic_cast<const DivergenceError*>(&e))
        return 2;
    if (dynamic_cast<const InsufficientData*>(&e) || dynamic_cast<const DegenerateCrossing*>(&e) ||
        dynamic_cast<const Inconclusive*>(&e))
        return 3;
    return 1;
}

CriterionResult run_criterion(int id, const SuiteOptions& opt) {
    if (id < 1 || id > kCriteria) throw InvalidInput("criterion ids run from 1 to " + std::to_string(kCriteria));
    CriterionResult r;
    r.id = id;
    auto t0 = Clock::now();
    if (id == kCriteria) {
        // infrastructure: a seeded criterion rerun must produce the same table
        r.title = "reproducibility";
        r.anchor = "artifact-determinism";
        Builder c{r, 1.0};
        try {
            SuiteReport a, b;
            a.criteria.push_back(run_criterion(5, opt));
            b.criteria.push_back(run_criterion(5, opt));
            c.truth("seeded rerun gives byte-identical csv", a.table(opt.seed).str() == b.table(opt.seed).str());
        } catch (const std::exception& e) {
            r.error = e.what();
            r.error_code = exit_code_for(e);
        }
        r.seconds = since(t0);
        return r;
    }
    const Entry& e = kEntries[id - 1];
    r.title = e.title;
    r.anchor = e.anchor;
    Builder c{r, opt.tol_scale};
    try {
        e.fn(opt, c);
    } catch (const std::exception& ex) {
        r.error = ex.what();
        r.error_code = exit_code_for(ex);
    }
    r.seconds = since(t0);
    return r;
}

SuiteReport run_suite(const SuiteOptions& opt) {
    SuiteReport rep;
    auto t0 = Clock::now();
    for (int id = 1; id <= kCriteria; ++id) {
        if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
        rep.criteria.push_back(run_criterion(id, opt));
    }
    rep.seconds = since(t0);
    for (auto& c : rep.criteria)
        if (c.id == kCriteria) c.checks.push_back({"suite runtime", rep.seconds <= 120.0, rep.seconds, 120.0, 0.0, true});
    return rep;
}

bool SuiteReport::pass() const {
    for (const auto& c : criteria)
        if (!c.pass()) return false;
    return !criteria.empty();
}

CsvTable SuiteReport::table(std::uint64_t seed) const {
    CsvTable t({"criterion", "check", "value", "expected", "tolerance", "pass"}, seed);
    for (const auto& c : criteria) {
        if (!c.error.empty()) t.add_row(c.anchor, {std::to_string(c.id), "error: " + c.error, "", "", "", "0"});
        for (const auto& k : c.checks) {
            if (k.timing) continue;
            t.add_row(c.anchor, {std::to_string(c.id), k.name, format_number(k.value), format_number(k.expected),
                                 format_number(k.tolerance), k.pass ? "1" : "0"});
        }
    }
    return t;
}

std::string SuiteReport::text() const {
    std::ostringstream os;
    for (const auto& c : criteria) {
        os << (c.pass() ? "[PASS] " : "[FAIL] ") << std::setw(2) << c.id << "  " << c.title << "  (" << std::fixed
           << std::setprecision(2) << c.seconds << " s)\n";
        os.unsetf(std::ios::fixed);
        if (!c.error.empty()) os << "         error: " << c.error << "\n";
        for (const auto& k : c.checks) {
            os << "       " << (k.pass ? "ok   " : "FAIL ") << k.name << ": " << format_number(k.value);
            if (k.timing)
                os << " s (budget " << format_number(k.expected) << " s)";
            else if (k.tolerance > 0)
                os << " (expected " << format_number(k.expected) << " +- " << format_number(k.tolerance) << ")";
            else
                os << " (expected " << format_number(k.expected) << ")";
            os << "\n";
        }
    }
    return os.str();
}

}  // namespace singtrace
