#include "singtrace/dixmier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "singtrace/errors.hpp"
#include "singtrace/parallel.hpp"

namespace singtrace {

const char* to_string(Route r) {
    switch (r) {
        case Route::partial_sum: return "partial_sum";
        case Route::cutoff: return "cutoff";
        case Route::stretched_cutoff: return "stretched_cutoff";
        case Route::zeta: return "zeta";
        case Route::heat: return "heat";
    }
    return "?";
}

Route route_from_string(const std::string& s) {
    for (Route r : {Route::partial_sum, Route::cutoff, Route::stretched_cutoff, Route::zeta, Route::heat})
        if (s == to_string(r)) return r;
    throw InvalidInput("unknown route '" + s + "'");
}

double route_constant(Route r, double p) {
    if (!(p >= 1.0)) throw InvalidInput("route normalization needs p >= 1");
    switch (r) {
        case Route::zeta: return p;
        case Route::heat: return std::tgamma(1.0 + 0.5 * p);
        default: return 1.0;
    }
}

LimitBand normalize(const LimitBand& raw, Route r, double p) { return raw.scaled(1.0 / route_constant(r, p)); }

namespace {

constexpr double kUMin = 1.0;
constexpr double kUMax = 1e6;
constexpr int kUPerDecade = 32;

// log(1 + e^u)
double log1p_exp(double u) { return u > 40.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

std::string u_grid_spec() {
    std::ostringstream os;
    os << "u=ln t in [" << kUMin << "," << kUMax << "] " << kUPerDecade << "/decade";
    return os.str();
}

LimitBand log_route(const std::function<double(double)>& ratio, double tol) {
    auto u = make_grid({kUMin, kUMax, kUPerDecade});
    std::vector<double> v(u.size());
    parallel_for(u.size(), [&](std::size_t i) { v[i] = ratio(u[i]); });
    return limit_band(GridFunction::tabulated(std::move(u), std::move(v), true), tol, BandMethod::richardson_log);
}

}  // namespace

void require_dixmier_ideal(const SpectralModel& m) {
    if (m.finite_rank()) return;
    IdealParams ip;
    ip.p = 1.0;
    ip = ideal_norm(m, ip, log_grid(1.0, 1e14, 4));
    if (!ip.in_ideal) {
        std::ostringstream os;
        os << "model is not in L^(1,inf): F(t)/log(1+t) grows (sup on grid " << ip.norm_estimate << " at t = "
           << ip.argmax_t << ")";
        throw NotInIdeal(os.str());
    }
}

LimitBand route_partial_sum(const SpectralModel& m, double tol) {
    require_dixmier_ideal(m);
    return log_route([&](double u) { return integral_mu(m, XReal::exp_of(u)) / log1p_exp(u); }, tol);
}

LimitBand route_cutoff(const SpectralModel& m, double tol, std::optional<double> stretch) {
    require_dixmier_ideal(m);
    if (stretch) {
        double C = *stretch;
        if (!(C > 0)) throw InvalidInput("stretch constant must be positive");
        return log_route([&](double u) { return integral_mu(m, XReal::exp_of(u + std::log(C * u))) / log1p_exp(u); },
                         tol);
    }
    return log_route([&](double u) { return cutoff_trace(m, XReal::exp_of(-u)) / log1p_exp(u); }, tol);
}

ZetaProbe route_zeta(const SpectralModel& m, double p, double tol, bool weighted) {
    if (weighted && !m.weighted()) throw InvalidInput("weighted zeta route needs a trace weight");
    if (m.abscissa() > p + 1e-12)
        throw DivergenceError("zeta route at p = " + std::to_string(p) + " is below the model abscissa",
                              m.abscissa());
    ZetaProbe z;
    z.p = p;
    z.weighted = weighted;
    for (int k = 4; k <= 24; ++k) z.r_grid.push_back(std::ldexp(1.0, k));
    z.samples.assign(z.r_grid.size(), 0.0);
    std::vector<char> ok(z.r_grid.size(), 1);
    ZetaOptions zo;
    zo.use_weight = weighted;
    parallel_for(z.r_grid.size(), [&](std::size_t i) {
        double r = z.r_grid[i];
        try {
            z.samples[i] = zeta(m, p + 1.0 / r, zo) / r;
            if (!std::isfinite(z.samples[i])) ok[i] = 0;
        } catch (const DivergenceError&) {
            ok[i] = 0;
        }
    });
    // an overflow at extreme r truncates the grid there
    auto bad = std::find(ok.begin(), ok.end(), 0);
    if (bad != ok.end()) {
        std::size_t n = static_cast<std::size_t>(bad - ok.begin());
        std::ostringstream os;
        os << "grid truncated at r = " << z.r_grid[n] << " (non-finite zeta)";
        z.note = os.str();
        z.r_grid.resize(n);
        z.samples.resize(n);
    }
    std::vector<double> x(z.r_grid.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 1.0 / z.r_grid[i];
    z.raw = estimate_band(z.r_grid, x, z.samples, tol, BandMethod::richardson_r,
                          default_band_options(BandMethod::richardson_r));
    z.raw.windows = "r=2^k k=4..24; " + z.raw.windows;
    z.value = normalize(z.raw, Route::zeta, p);
    return z;
}

HeatProbe route_heat(const SpectralModel& m, double p, double tol, bool weighted) {
    if (weighted && !m.weighted()) throw InvalidInput("weighted heat route needs a trace weight");
    HeatProbe h;
    h.p = p;
    h.weighted = weighted;
    h.gamma_const = route_constant(Route::heat, p);
    for (int k = 1; k <= 24; ++k) h.lambda_grid.push_back(std::ldexp(1.0, k));
    h.samples.assign(h.lambda_grid.size(), 0.0);
    parallel_for(h.lambda_grid.size(), [&](std::size_t i) {
        double l = h.lambda_grid[i];
        h.samples[i] = heat_trace(m, l, p, weighted) / l;
    });
    std::vector<double> x(h.lambda_grid.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 1.0 / h.lambda_grid[i];
    BandOptions opt = default_band_options(BandMethod::richardson_r);
    // counting function ~ lambda^(1/(p q)) leaves a term lambda^-(1 - 1/(p q))
    double q = m.tail_law().q;
    if (!m.finite_rank() && q > 0) {
        double alpha = 1.0 - 1.0 / (p * q);
        if (alpha > 1e-9 && alpha < 1.0 - 1e-9) opt.exponents.push_back(alpha);
    }
    h.raw = estimate_band(h.lambda_grid, x, h.samples, tol, BandMethod::richardson_r, opt);
    h.raw.windows = "lambda=2^k k=1..24; " + h.raw.windows;
    h.value = normalize(h.raw, Route::heat, p);
    return h;
}

const RouteResult* TraceReport::find(Route r) const {
    for (const auto& x : routes)
        if (x.route == r) return &x;
    return nullptr;
}

bool TraceReport::all_converged() const {
    return !routes.empty() && std::all_of(routes.begin(), routes.end(), [](const RouteResult& r) {
        return r.error.empty() && r.band.converged;
    });
}

bool TraceReport::any_converged() const {
    return std::any_of(routes.begin(), routes.end(),
                       [](const RouteResult& r) { return r.error.empty() && r.band.converged; });
}

TraceReport agree(const SpectralModel& m, double p, double tol, const AgreeOptions& opt) {
    if (!(tol > 0)) throw InvalidInput("tolerance must be positive");
    TraceReport rep;
    rep.tolerance = tol;
    rep.p = p;
    SpectralModel mp = p == 1.0 ? m : m.power(p);
    // tau_w(aT) = a tau_w(T) lets the F-based routes carry a constant weight
    double wscale = 1.0;
    bool f_routes = true;
    if (opt.weighted) {
        if (!m.weighted()) throw InvalidInput("weighted agreement needs a trace weight");
        if (m.weight_constant()) wscale = m.weight_at(0.0);
        else f_routes = false;
    }
    for (Route r : opt.routes) {
        bool f_based = r == Route::partial_sum || r == Route::cutoff || r == Route::stretched_cutoff;
        if (f_based && !f_routes) continue;
        RouteResult rr;
        rr.route = r;
        try {
            switch (r) {
                case Route::partial_sum:
                    rr.band = route_partial_sum(mp, tol).scaled(wscale);
                    rr.grid_spec = u_grid_spec();
                    break;
                case Route::cutoff:
                    rr.band = route_cutoff(mp, tol).scaled(wscale);
                    rr.grid_spec = u_grid_spec();
                    break;
                case Route::stretched_cutoff:
                    rr.band = route_cutoff(mp, tol, opt.stretch).scaled(wscale);
                    rr.grid_spec = u_grid_spec() + " C=" + std::to_string(opt.stretch);
                    break;
                case Route::zeta: {
                    auto z = route_zeta(m, p, tol, opt.weighted);
                    rr.band = z.value;
                    rr.grid_spec = "r=2^k k=4..24" + (z.note.empty() ? "" : "; " + z.note);
                    break;
                }
                case Route::heat:
                    rr.band = route_heat(m, p, tol, opt.weighted).value;
                    rr.grid_spec = "lambda=2^k k=1..24";
                    break;
            }
        } catch (const Error& e) {
            rr.error = e.what();
        }
        rep.routes.push_back(std::move(rr));
    }

    bool ok = !rep.routes.empty();
    std::vector<double> values;
    std::vector<const LimitBand*> open;
    for (const auto& rr : rep.routes) {
        if (!rr.error.empty()) ok = false;
        else if (rr.band.converged) values.push_back(*rr.band.value);
        else open.push_back(&rr.band);
    }
    if (!values.empty()) {
        auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        if (*hi - *lo > tol) ok = false;
    }
    for (std::size_t i = 0; i < open.size(); ++i)
        for (std::size_t j = i + 1; j < open.size(); ++j)
            if (!open[i]->overlaps(*open[j], tol)) ok = false;
    rep.agreed = ok;
    if (ok && !values.empty()) {
        double s = 0;
        for (double v : values) s += v;
        rep.consensus_value = s / static_cast<double>(values.size());
    }
    return rep;
}

}  // namespace singtrace
