#include "singtrace/means.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "singtrace/errors.hpp"
#include "singtrace/quadrature.hpp"

namespace singtrace {

std::vector<double> make_grid(const GridSpec& spec) {
    if (!(spec.t_min > 0) || !(spec.t_max > spec.t_min) || spec.per_decade < 1)
        throw InvalidInput("grid needs 0 < t_min < t_max and per_decade >= 1");
    double decades = std::log10(spec.t_max / spec.t_min);
    int n = static_cast<int>(std::ceil(decades * spec.per_decade - 1e-9));
    std::vector<double> g;
    g.reserve(n + 1);
    for (int i = 0; i <= n; ++i)
        g.push_back(i == n ? spec.t_max : spec.t_min * std::pow(10.0, static_cast<double>(i) / spec.per_decade));
    return g;
}

GridFunction GridFunction::sample(std::function<double(double)> f, const GridSpec& spec) {
    GridFunction g;
    g.grid = make_grid(spec);
    g.values.reserve(g.grid.size());
    for (double t : g.grid) g.values.push_back(f(t));
    g.eval = std::move(f);
    return g;
}

GridFunction GridFunction::tabulated(std::vector<double> grid, std::vector<double> values, bool log_abscissa) {
    if (grid.size() != values.size() || grid.size() < 2) throw InvalidInput("tabulated grid function needs matching samples");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(grid[i] > 0) || !(grid[i + 1] > grid[i])) throw InvalidInput("grid must be positive and strictly increasing");
    GridFunction g;
    g.grid = std::move(grid);
    g.values = std::move(values);
    g.log_abscissa = log_abscissa;
    return g;
}

double GridFunction::at(double x) const {
    if (eval) return eval(x);
    if (x <= grid.front()) return values.front();
    if (x >= grid.back()) return values.back();
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    std::size_t i = static_cast<std::size_t>(it - grid.begin()) - 1;
    double w = std::log(x / grid[i]) / std::log(grid[i + 1] / grid[i]);
    return values[i] + w * (values[i + 1] - values[i]);
}

double GridFunction::sup_abs() const {
    double s = 0;
    for (double v : values) s = std::max(s, std::fabs(v));
    return s;
}

double GridFunction::decades() const { return std::log10(grid.back() / grid.front()); }

namespace {

// int over [a,b] of the interpolant linear in v = ln t, times dt = e^v dv
double exp_weighted_segment(double fa, double fb, double a, double b) {
    double h = std::log(b / a);
    return fa * (b - a) + (fb - fa) / h * ((h - 1.0) * b + a);
}

}  // namespace

GridFunction hardy_mean(const GridFunction& f) {
    const auto& t = f.grid;
    GridFunction out;
    out.grid = t;
    out.log_abscissa = f.log_abscissa;
    out.values.resize(t.size());
    double acc;
    if (f.eval) {
        acc = integrate(f.eval, 0.0, t[0], 1e-13);
        out.values[0] = acc / t[0];
        for (std::size_t i = 1; i < t.size(); ++i) {
            acc += integrate(f.eval, t[i - 1], t[i], 1e-13);
            out.values[i] = acc / t[i];
        }
        return out;
    }
    // constant extension below the first grid point
    acc = f.values[0] * t[0];
    out.values[0] = f.values[0];
    for (std::size_t i = 1; i < t.size(); ++i) {
        acc += exp_weighted_segment(f.values[i - 1], f.values[i], t[i - 1], t[i]);
        out.values[i] = acc / t[i];
    }
    return out;
}

GridFunction cesaro_mean(const GridFunction& g) {
    // on a log abscissa u = ln t the Cesaro mean in t is the Hardy mean in u
    if (g.log_abscissa) return hardy_mean(g);
    const auto& t = g.grid;
    if (t.front() < 1.0) throw DomainError("Cesaro mean needs a grid starting at t >= 1");
    GridFunction out;
    out.grid = t;
    out.values.resize(t.size());
    double acc;
    auto ge = [&](double v) { return g.eval(std::exp(v)); };
    if (g.eval) acc = t[0] > 1.0 ? integrate(ge, 0.0, std::log(t[0]), 1e-13) : 0.0;
    else acc = g.values[0] * std::log(t[0]);
    out.values[0] = t[0] > 1.0 ? acc / std::log(t[0]) : g.values[0];
    for (std::size_t i = 1; i < t.size(); ++i) {
        double v0 = std::log(t[i - 1]), v1 = std::log(t[i]);
        if (g.eval) acc += integrate(ge, v0, v1, 1e-13);
        else acc += 0.5 * (g.values[i - 1] + g.values[i]) * (v1 - v0);
        out.values[i] = acc / v1;
    }
    return out;
}

GridFunction transform(const GridFunction& f, TransformKind kind, double param) {
    if ((kind == TransformKind::dilate || kind == TransformKind::power) && !(param > 0))
        throw DomainError("dilation and power transforms need a > 0");
    GridFunction src = f;
    auto base = [src](double x) { return src.at(x); };
    GridFunction out;
    out.log_abscissa = f.log_abscissa;
    switch (kind) {
        case TransformKind::translate: out.eval = [base, param](double x) { return base(x + param); }; break;
        case TransformKind::dilate: out.eval = [base, param](double x) { return base(param * x); }; break;
        case TransformKind::power: out.eval = [base, param](double x) { return base(std::pow(x, param)); }; break;
        case TransformKind::log_substitute: out.eval = [base](double x) { return base(std::log(x)); }; break;
    }
    if (kind == TransformKind::log_substitute) {
        // an additive grid [a, b] becomes the multiplicative grid [e^a, e^b]
        if (f.grid.back() > 700.0) throw DomainError("log substitution leaves the double range");
        for (double x : f.grid) out.grid.push_back(std::exp(x));
    } else {
        out.grid = f.grid;
    }
    for (double x : out.grid) out.values.push_back(out.eval(x));
    return out;
}

CommutationReport commutation_residuals(const GridFunction& f, double a, double b) {
    if (!f.eval) throw InvalidInput("commutation residuals need a closed-form function");
    if (!(a > 0)) throw DomainError("dilation parameter must be positive");
    CommutationReport rep;
    const auto& t = f.grid;
    double tmax = t.back();
    rep.t_end = tmax;
    double sup = f.sup_abs();
    auto F = f.eval;

    // (H T_b - T_b H) f through cumulative integrals G(t) = int_0^t f
    double Gb = b >= 0 ? integrate(F, 0.0, b, 1e-13) : -integrate(F, b, 0.0, 1e-13);
    double G = integrate(F, 0.0, t[0], 1e-13);
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i > 0) G += integrate(F, t[i - 1], t[i], 1e-13);
        if (t[i] < tmax / 10.0) continue;
        double J = b >= 0 ? integrate(F, t[i], t[i] + b, 1e-13) : -integrate(F, t[i] + b, t[i], 1e-13);
        double r = (G + J - Gb) / t[i] - (G + J) / (t[i] + b);
        rep.translation_residual = std::max(rep.translation_residual, std::fabs(r));
    }
    double t_start = *std::lower_bound(t.begin(), t.end(), tmax / 10.0);
    rep.translation_bound = 2.0 * sup * std::fabs(b) / std::fabs(t_start + b);

    // (M D_a - D_a M) f through K(v) = int_0^v f(e^w) dw
    auto fe = [&](double w) { return F(std::exp(w)); };
    double la = std::log(a);
    double Ka = la >= 0 ? integrate(fe, 0.0, la, 1e-13) : -integrate(fe, la, 0.0, 1e-13);
    for (double ti : t) {
        if (ti < tmax / 10.0 || ti <= 1.0 || a * ti <= 1.0) continue;
        double lt = std::log(ti);
        double Kat = integrate(fe, 0.0, lt + la, 1e-13);
        double r = (Kat - Ka) / lt - Kat / (lt + la);
        rep.dilation_residual = std::max(rep.dilation_residual, std::fabs(r));
    }

    // exact identities at a few interior points
    double worst = 0.0;
    auto H = [&](const std::function<double(double)>& g, double x) { return integrate(g, 0.0, x, 1e-13) / x; };
    auto M = [&](const std::function<double(double)>& g, double x) {
        return integrate([&](double s) { return g(s) / s; }, 1.0, x, 1e-13) / std::log(x);
    };
    for (double x : {2.0, 5.0, 17.0, 60.0}) {
        double lx = std::log(x);
        // L D_a L^-1 = P^a and L T_b = D_{e^b} L
        worst = std::max(worst, std::fabs(F(a * lx) - F(std::log(std::pow(x, a)))));
        worst = std::max(worst, std::fabs(F(lx + b) - F(std::log(std::exp(b) * x))));
        // L H = M L
        double lh = H(F, lx);
        double ml = M([&](double s) { return F(std::log(s)); }, x);
        worst = std::max(worst, std::fabs(lh - ml));
        // D_a H = H D_a and P^a M = M P^a
        worst = std::max(worst, std::fabs(H(F, a * x) - H([&](double y) { return F(a * y); }, x)));
        if (std::pow(x, a) > 1.0)
            worst = std::max(worst, std::fabs(M(F, std::pow(x, a)) - M([&](double s) { return F(std::pow(s, a)); }, x)));
    }
    rep.identity_residual = worst;
    return rep;
}

const char* to_string(BandMethod m) {
    switch (m) {
        case BandMethod::raw_tail: return "raw_tail";
        case BandMethod::richardson_log: return "richardson_log";
        case BandMethod::richardson_r: return "richardson_r";
        case BandMethod::cesaro_iterate: return "cesaro_iterate";
    }
    return "?";
}

LimitBand LimitBand::scaled(double factor) const {
    LimitBand b = *this;
    if (b.value) b.value = *b.value * factor;
    b.liminf_est *= factor;
    b.limsup_est *= factor;
    if (factor < 0) std::swap(b.liminf_est, b.limsup_est);
    b.band_width *= std::fabs(factor);
    b.fit_residual *= std::fabs(factor);
    b.stability *= std::fabs(factor);
    return b;
}

bool LimitBand::overlaps(const LimitBand& o, double slack) const {
    return liminf_est <= o.limsup_est + slack && o.liminf_est <= limsup_est + slack;
}

BandOptions default_band_options(BandMethod m) {
    BandOptions o;
    if (m == BandMethod::richardson_log) {
        o.exponents = {1.0};
        o.log_term = true;
    } else if (m == BandMethod::richardson_r) {
        o.exponents = {1.0, 2.0};
    }
    return o;
}

namespace {

struct Fit {
    double c0 = 0;
    double residual = 0;
    bool ok = false;
};

Fit fit_constant_term(const std::vector<std::size_t>& idx, std::span<const double> x, std::span<const double> v,
                      const BandOptions& opt) {
    int cols = 1 + static_cast<int>(opt.exponents.size()) + (opt.log_term ? 1 : 0);
    Fit fit;
    if (static_cast<int>(idx.size()) < cols + 2) return fit;
    Eigen::MatrixXd A(idx.size(), cols);
    Eigen::VectorXd y(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        double xi = x[idx[r]];
        int c = 0;
        A(r, c++) = 1.0;
        for (double e : opt.exponents) A(r, c++) = std::pow(xi, e);
        if (opt.log_term) A(r, c++) = xi * std::log(1.0 / xi);
        y(r) = v[idx[r]];
    }
    // column scaling keeps the least-squares problem well conditioned
    Eigen::VectorXd scale = A.cwiseAbs().colwise().maxCoeff().transpose();
    for (int c = 0; c < cols; ++c)
        if (scale(c) > 0) A.col(c) /= scale(c);
    Eigen::VectorXd coef = A.colPivHouseholderQr().solve(y);
    Eigen::VectorXd res = A * coef - y;
    fit.c0 = coef(0) / scale(0);
    fit.residual = res.cwiseAbs().maxCoeff();
    fit.ok = std::isfinite(fit.c0);
    return fit;
}

std::string describe_windows(std::span<const double> scale, double lo, int windows) {
    std::ostringstream os;
    os.precision(4);
    os << windows << " decade windows over [" << lo << ", " << scale.back() << "]";
    return os.str();
}

}  // namespace

LimitBand estimate_band(std::span<const double> scale, std::span<const double> x, std::span<const double> values,
                        double tol, BandMethod method, const BandOptions& opt) {
    if (scale.size() != values.size() || x.size() != values.size()) throw InvalidInput("band samples size mismatch");
    if (scale.size() < 4) throw InsufficientData("too few samples for a limit band");
    double decades = std::log10(scale.back() / scale.front());
    if (decades < opt.min_decades - 1e-9)
        throw InsufficientData("limit band needs " + std::to_string(opt.min_decades) + " decades, got " +
                               std::to_string(decades));
    for (double v : values)
        if (!std::isfinite(v)) throw InsufficientData("non-finite sample in limit band input");

    LimitBand b;
    b.method = method;
    double smax = scale.back();
    double lo = smax / std::pow(10.0, opt.windows);
    std::vector<std::size_t> tail;
    for (std::size_t i = 0; i < scale.size(); ++i)
        if (scale[i] >= lo * (1 - 1e-12)) tail.push_back(i);
    double mn = values[tail[0]], mx = mn;
    for (std::size_t i : tail) {
        mn = std::min(mn, values[i]);
        mx = std::max(mx, values[i]);
    }
    b.windows = describe_windows(scale, lo, opt.windows);
    b.liminf_est = mn;
    b.limsup_est = mx;
    b.band_width = mx - mn;

    if (method == BandMethod::raw_tail || method == BandMethod::cesaro_iterate) {
        b.converged = b.band_width <= tol;
        if (b.converged) b.value = 0.5 * (mn + mx);
        return b;
    }

    Fit full = fit_constant_term(tail, x, values, opt);
    if (!full.ok) throw InsufficientData("too few tail samples for the extrapolation basis");
    std::vector<double> c0s{full.c0};
    // refit with leading windows removed
    for (int k = 1; k < opt.windows; ++k) {
        double lo_k = smax / std::pow(10.0, opt.windows - k);
        std::vector<std::size_t> sub;
        for (std::size_t i : tail)
            if (scale[i] >= lo_k * (1 - 1e-12)) sub.push_back(i);
        Fit f = fit_constant_term(sub, x, values, opt);
        if (f.ok) c0s.push_back(f.c0);
    }
    double cmin = *std::min_element(c0s.begin(), c0s.end());
    double cmax = *std::max_element(c0s.begin(), c0s.end());
    b.fit_residual = full.residual;
    b.stability = cmax - cmin;
    b.converged = full.residual <= tol && b.stability <= tol && c0s.size() >= 2;
    if (b.converged) {
        b.value = full.c0;
        b.liminf_est = cmin;
        b.limsup_est = cmax;
        b.band_width = cmax - cmin;
    }
    return b;
}

LimitBand limit_band(const GridFunction& f, double tol, BandMethod method) {
    return limit_band(f, tol, method, default_band_options(method));
}

LimitBand limit_band(const GridFunction& f, double tol, BandMethod method, const BandOptions& opt) {
    std::vector<double> x(f.grid.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double s = f.grid[i];
        if (method == BandMethod::richardson_log) x[i] = f.log_abscissa ? 1.0 / s : 1.0 / std::log(s);
        else x[i] = 1.0 / s;
    }
    if (method == BandMethod::richardson_log)
        for (double xi : x)
            if (!(xi > 0) || !std::isfinite(xi)) throw InsufficientData("richardson_log needs t > 1 on the grid");
    if (method != BandMethod::cesaro_iterate) return estimate_band(f.grid, x, f.values, tol, method, opt);

    GridFunction g = f;
    LimitBand b;
    for (int k = 1; k <= opt.max_iterations; ++k) {
        g = cesaro_mean(g);
        g.eval = nullptr;
        b = estimate_band(g.grid, x, g.values, tol, BandMethod::cesaro_iterate, opt);
        b.iterations = k;
        if (b.converged) break;
    }
    b.windows += ", " + std::to_string(b.iterations) + " Cesaro passes";
    return b;
}

}  // namespace singtrace
