#include "singtrace/tauberian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "singtrace/errors.hpp"
#include "singtrace/parallel.hpp"
#include "singtrace/quadrature.hpp"
#include "singtrace/series.hpp"

namespace singtrace {

const char* to_string(MeasureKind k) {
    switch (k) {
        case MeasureKind::jump_list: return "jump_list";
        case MeasureKind::jump_sequence: return "jump_sequence";
        case MeasureKind::periodic: return "periodic";
        case MeasureKind::closed_form: return "closed_form";
        case MeasureKind::sum: return "sum";
    }
    return "?";
}

namespace {

// explicit head of a jump sequence; Euler-Maclaurin beyond
constexpr std::size_t kJumpHead = 4096;

}  // namespace

struct StieltjesMeasure::Impl {
    MeasureKind kind;
    std::vector<std::pair<double, double>> jumps;  // sorted by t
    std::vector<double> jump_prefix;
    Expression t_expr, c_expr, beta_expr;
    TailLaw growth;
    std::vector<double> head_t, head_c, head_prefix;  // jump_sequence
    std::vector<double> increments, inc_prefix;       // periodic
    std::vector<std::shared_ptr<const Impl>> parts;

    template <class S>
    S c_of(const S& n) const {
        return c_expr(n);
    }

    double h(double r) const;
    double beta(double t) const;
    // number of jump-sequence indices with t(n) <= t
    XReal count_upto(double t) const;
};

XReal StieltjesMeasure::Impl::count_upto(double t) const {
    std::size_t H = head_t.size();
    auto it = std::upper_bound(head_t.begin(), head_t.end(), t);
    if (it != head_t.end()) return XReal(static_cast<double>(it - head_t.begin()));
    // t(n) <= t somewhere beyond the head: bisect in v = ln n
    auto t_at = [&](double v) { return to_double(t_expr(XReal::exp_of(v))); };
    double lo = std::log(static_cast<double>(H - 1)), hi = lo + 1.0;
    while (t_at(hi) <= t) {
        lo = hi;
        hi = 2.0 * hi;
        if (hi > 1e17) throw DomainError("jump positions do not grow past t");
    }
    for (int i = 0; i < 400 && hi - lo > 4e-16 * hi; ++i) {
        double mid = 0.5 * (lo + hi);
        if (t_at(mid) <= t) lo = mid;
        else hi = mid;
    }
    XReal x = XReal::exp_of(lo);
    if (x < XReal(4503599627370496.0)) {
        double n = std::floor(x.to_double());
        while (to_double(t_expr(n + 1.0)) <= t) n += 1.0;
        while (n >= static_cast<double>(H) && to_double(t_expr(n)) > t) n -= 1.0;
        return XReal(n + 1.0);
    }
    return x;
}

double StieltjesMeasure::Impl::beta(double t) const {
    switch (kind) {
        case MeasureKind::jump_list: {
            auto it = std::upper_bound(jumps.begin(), jumps.end(), t,
                                       [](double v, const std::pair<double, double>& j) { return v < j.first; });
            return jump_prefix[static_cast<std::size_t>(it - jumps.begin())];
        }
        case MeasureKind::periodic: {
            if (t < 1.0) return 0.0;
            double N = std::floor(t);
            double P = static_cast<double>(increments.size());
            double full = std::floor(N / P);
            auto rem = static_cast<std::size_t>(N - full * P);
            return full * inc_prefix.back() + inc_prefix[rem];
        }
        case MeasureKind::closed_form: return t <= 0 ? 0.0 : beta_expr(t);
        case MeasureKind::jump_sequence: {
            XReal N = count_upto(t);
            double H = static_cast<double>(head_t.size());
            if (N <= XReal(H)) return head_prefix[static_cast<std::size_t>(N.to_double())];
            auto f = [&](const auto& n) { return c_of(n); };
            return head_prefix.back() + euler_maclaurin_range(f, H, N);
        }
        case MeasureKind::sum: {
            double s = 0;
            for (const auto& p : parts) s += p->beta(t);
            return s;
        }
    }
    return 0.0;
}

double StieltjesMeasure::Impl::h(double r) const {
    switch (kind) {
        case MeasureKind::jump_list: {
            double s = 0;
            for (const auto& [t, c] : jumps) s += c * std::exp(-t / r);
            return s;
        }
        case MeasureKind::periodic: {
            double s = 0;
            for (std::size_t j = 0; j < increments.size(); ++j)
                s += increments[j] * std::exp(-(static_cast<double>(j) + 1.0) / r);
            return s / -std::expm1(-static_cast<double>(increments.size()) / r);
        }
        case MeasureKind::closed_form: {
            // after integration by parts, t = r v: h = int_0^inf e^{-v} beta(r v) dv
            auto g = [&](double v) { return v <= 0 ? 0.0 : std::exp(-v) * beta_expr(r * v); };
            return integrate_to_infinity(g, 0.0, 1e-15);
        }
        case MeasureKind::jump_sequence: {
            double s = 0.0, comp = 0.0;
            for (std::size_t n = 0; n < head_t.size(); ++n) {
                double y = head_c[n] * std::exp(-head_t[n] / r) - comp;
                double tmp = s + y;
                comp = (tmp - s) - y;
                s = tmp;
            }
            double inv_r = 1.0 / r;
            auto f = [&](const auto& n) {
                using S = std::decay_t<decltype(n)>;
                using std::exp;
                return c_of(n) * exp(-(t_expr(n) * S(inv_r)));
            };
            double first = head_c.back() * std::exp(-head_t.back() / r);
            if (first == 0.0) return s;
            return s + euler_maclaurin_tail(f, static_cast<double>(head_t.size()));
        }
        case MeasureKind::sum: {
            double s = 0;
            for (const auto& p : parts) s += p->h(r);
            return s;
        }
    }
    return 0.0;
}

namespace {

void check_growth(const std::function<double(double)>& beta, const TailLaw& g) {
    if (!(g.c > 0)) throw InvalidInput("measure growth law needs c > 0");
    double lo = std::max(g.t0, 1.0);
    for (int i = 0; i < 64; ++i) {
        double t = lo * std::pow(10.0, 12.0 * i / 63.0);
        double b = beta(t);
        if (!(b <= g.c * std::pow(1.0 + t, g.q) * (1 + 1e-12)))
            throw InvalidInput("beta exceeds its declared growth law at t = " + std::to_string(t));
    }
}

}  // namespace

StieltjesMeasure StieltjesMeasure::jumps(std::vector<std::pair<double, double>> j) {
    auto I = std::make_shared<Impl>();
    I->kind = MeasureKind::jump_list;
    for (const auto& [t, c] : j)
        if (!(t >= 0) || !(c >= 0) || !std::isfinite(t) || !std::isfinite(c))
            throw InvalidInput("jumps need t >= 0 and c >= 0");
    std::stable_sort(j.begin(), j.end());
    I->jumps = std::move(j);
    I->jump_prefix.push_back(0.0);
    for (const auto& [t, c] : I->jumps) I->jump_prefix.push_back(I->jump_prefix.back() + c);
    return StieltjesMeasure(I);
}

StieltjesMeasure StieltjesMeasure::jump_sequence(const Expression& t, const Expression& c, TailLaw growth) {
    auto I = std::make_shared<Impl>();
    I->kind = MeasureKind::jump_sequence;
    I->t_expr = t;
    I->c_expr = c;
    I->growth = growth;
    I->head_prefix.push_back(0.0);
    for (std::size_t n = 0; n < kJumpHead; ++n) {
        double tn = t(static_cast<double>(n)), cn = c(static_cast<double>(n));
        if (!std::isfinite(tn) || !std::isfinite(cn) || tn < 0 || cn < 0)
            throw InvalidInput("jump sequence needs finite t(n) >= 0 and c(n) >= 0 (n = " + std::to_string(n) + ")");
        if (n > 0 && !(tn > I->head_t.back())) throw InvalidInput("jump positions t(n) must increase");
        I->head_t.push_back(tn);
        I->head_c.push_back(cn);
        I->head_prefix.push_back(I->head_prefix.back() + cn);
    }
    for (int i = 0; i < 64; ++i) {
        XReal n = XReal::exp_of(std::log(static_cast<double>(kJumpHead)) + 0.5 * i);
        if (!(c(n).sign() >= 0) || !(t(n) > XReal(I->head_t.back())))
            throw InvalidInput("jump sequence leaves its contract beyond the explicit head");
    }
    check_growth([&](double x) { return I->beta(x); }, growth);
    return StieltjesMeasure(I);
}

StieltjesMeasure StieltjesMeasure::periodic(std::vector<double> increments) {
    if (increments.empty()) throw InvalidInput("periodic measure needs at least one increment");
    for (double c : increments)
        if (!(c >= 0) || !std::isfinite(c)) throw InvalidInput("increments must be nonnegative");
    auto I = std::make_shared<Impl>();
    I->kind = MeasureKind::periodic;
    I->increments = std::move(increments);
    I->inc_prefix.push_back(0.0);
    for (double c : I->increments) I->inc_prefix.push_back(I->inc_prefix.back() + c);
    return StieltjesMeasure(I);
}

StieltjesMeasure StieltjesMeasure::closed_form(const Expression& beta, TailLaw growth) {
    auto I = std::make_shared<Impl>();
    I->kind = MeasureKind::closed_form;
    I->beta_expr = beta;
    I->growth = growth;
    if (std::fabs(beta(0.0)) > 1e-12) throw InvalidInput("closed-form beta must vanish at 0");
    double prev = 0.0;
    for (int i = 0; i <= 256; ++i) {
        double t = 1e-6 * std::pow(10.0, 18.0 * i / 256.0);
        double b = beta(t);
        if (!std::isfinite(b) || b < prev - 1e-12 * std::fabs(prev))
            throw InvalidInput("closed-form beta must be finite and nondecreasing");
        prev = b;
    }
    check_growth([&](double x) { return beta(x); }, growth);
    return StieltjesMeasure(I);
}

StieltjesMeasure StieltjesMeasure::sum(const StieltjesMeasure& a, const StieltjesMeasure& b) {
    auto I = std::make_shared<Impl>();
    I->kind = MeasureKind::sum;
    I->parts = {a.impl_, b.impl_};
    return StieltjesMeasure(I);
}

MeasureKind StieltjesMeasure::kind() const { return impl_->kind; }

std::string StieltjesMeasure::describe() const {
    const Impl& I = *impl_;
    std::ostringstream os;
    os << to_string(I.kind);
    switch (I.kind) {
        case MeasureKind::jump_list: os << " (" << I.jumps.size() << " jumps)"; break;
        case MeasureKind::jump_sequence: os << " t(n)=" << I.t_expr.text() << " c(n)=" << I.c_expr.text(); break;
        case MeasureKind::periodic: os << " period " << I.increments.size(); break;
        case MeasureKind::closed_form: os << " beta(t)=" << I.beta_expr.text(); break;
        case MeasureKind::sum: os << " of " << I.parts.size(); break;
    }
    return os.str();
}

double laplace_stieltjes(const StieltjesMeasure& m, double r) {
    if (!(r > 0) || !std::isfinite(r)) throw DomainError("Laplace-Stieltjes transform needs r > 0");
    double h = m.impl_->h(r);
    if (!std::isfinite(h)) throw DivergenceError("Laplace-Stieltjes integral diverges", r);
    return h;
}

double beta_at(const StieltjesMeasure& m, double t) {
    if (!std::isfinite(t)) throw DomainError("beta needs finite t");
    return t < 0 ? 0.0 : m.impl_->beta(t);
}

namespace {

// power-law slope of |v| over the last two decades of t
bool grows(const std::vector<double>& t, const std::vector<double>& v) {
    double tmax = t.back();
    std::size_t i0 = 0;
    while (i0 + 1 < t.size() && t[i0] < tmax / 100.0) ++i0;
    double a = std::fabs(v[i0]), b = std::fabs(v.back());
    if (!(a > 0) || !(b > 0)) return false;
    return std::log(b / a) / std::log(tmax / t[i0]) > 0.1;
}

}  // namespace

KaramataReport karamata_compare(const StieltjesMeasure& m, double tol, const KaramataOptions& opt) {
    if (!(tol > 0)) throw InvalidInput("tolerance must be positive");
    KaramataReport rep;
    rep.grid = make_grid(opt.grid);
    std::size_t n = rep.grid.size();
    rep.h_ratio.assign(n, 0.0);
    rep.beta_ratio.assign(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        double x = rep.grid[i];
        rep.h_ratio[i] = laplace_stieltjes(m, x) / x;
        rep.beta_ratio[i] = beta_at(m, x) / x;
    });
    rep.h_unbounded = grows(rep.grid, rep.h_ratio);
    rep.beta_unbounded = grows(rep.grid, rep.beta_ratio);
    if (rep.h_unbounded) rep.tags.push_back("h(r)/r unbounded");
    if (rep.beta_unbounded) rep.tags.push_back("beta(t)/t unbounded");

    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 / rep.grid[i];
    BandOptions bo = default_band_options(BandMethod::richardson_r);
    rep.band_h = estimate_band(rep.grid, x, rep.h_ratio, tol, BandMethod::richardson_r, bo);
    rep.band_beta = estimate_band(rep.grid, x, rep.beta_ratio, tol, BandMethod::raw_tail, bo);
    if (rep.h_unbounded) rep.band_h.converged = false, rep.band_h.value.reset();
    if (rep.beta_unbounded) rep.band_beta.converged = false, rep.band_beta.value.reset();

    if (rep.h_unbounded || rep.beta_unbounded) {
        rep.consistent = true;
        rep.tags.push_back("vacuous");
        return rep;
    }
    bool ok = rep.band_h.overlaps(rep.band_beta, tol);
    if (rep.band_h.converged && rep.band_beta.converged)
        ok = ok && std::fabs(*rep.band_h.value - *rep.band_beta.value) <= tol;
    rep.consistent = ok;
    return rep;
}

StieltjesMeasure zeta_measure(const Expression& mu_n, TailLaw growth) {
    auto t = Expression::parse("-log(" + mu_n.text() + ")");
    return StieltjesMeasure::jump_sequence(t, mu_n, growth);
}

}  // namespace singtrace
