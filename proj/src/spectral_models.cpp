#include "singtrace/spectral_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "singtrace/errors.hpp"
#include "singtrace/jet.hpp"
#include "singtrace/quadrature.hpp"
#include "singtrace/series.hpp"

namespace singtrace {

const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::closed_form_mu: return "closed_form_mu";
        case ModelKind::integrated_form: return "integrated_form";
        case ModelKind::diagonal_sequence: return "diagonal_sequence";
        case ModelKind::matrix: return "matrix";
    }
    return "?";
}

struct SpectralModel::Impl {
    ModelKind kind = ModelKind::matrix;
    Expression expr;
    TailLaw tail;
    double power = 1.0;
    bool finite = false;
    double tail_sign = 1.0;
    double F_at_zero = 0.0;
    double head_integral = 0.0;  // int_0^1 mu, continuous kinds

    std::optional<Expression> weight;
    bool weight_is_const = true;
    double weight_value = 1.0;
    double weight_tail = 1.0;
    std::vector<double> weight_table;

    std::vector<double> table;   // mu_n in index order
    std::vector<double> sorted;  // descending
    std::vector<double> prefix;  // prefix[k] = sum of the k largest
    std::vector<double> eig;     // signed spectrum for finite kinds

    bool continuous() const {
        return kind == ModelKind::closed_form_mu || kind == ModelKind::integrated_form;
    }

    // smooth diagonal entry |a(x)|^p for x beyond the table
    template <class S>
    S tail_mu(const S& x) const {
        using std::pow;
        S a = expr(x);
        if (tail_sign < 0) a = -a;
        return pow(a, power);
    }

    template <class S>
    S cont_mu(const S& t) const {
        using std::pow;
        S v;
        if (kind == ModelKind::integrated_form) {
            Jet<S, 2> j = expr(Jet<S, 2>::variable(t));
            v = j.c[1];
        } else {
            v = expr(t);
        }
        if (v < S(0.0)) v = S(0.0);
        if (power == 1.0) return v;
        return pow(v, power);
    }

    double weight_n(std::size_t n) const {
        if (weight_is_const) return weight_value;
        if (n < weight_table.size()) return weight_table[n];
        return (*weight)(static_cast<double>(n));
    }
};

namespace {

using Impl = SpectralModel::Impl;

void setup_weight(Impl& I, const std::optional<Expression>& w, std::size_t table_size) {
    I.weight = w;
    if (!w) return;
    if (w->is_constant()) {
        I.weight_value = w->constant_value();
        I.weight_tail = I.weight_value;
        return;
    }
    if (I.continuous()) throw InvalidInput("non-constant trace weights need a discrete spectrum");
    I.weight_is_const = false;
    I.weight_table.resize(table_size);
    double sup = 0.0;
    for (std::size_t n = 0; n < table_size; ++n) {
        double v = (*w)(static_cast<double>(n));
        if (!std::isfinite(v)) throw InvalidInput("weight expression not finite at n=" + std::to_string(n));
        I.weight_table[n] = v;
        sup = std::max(sup, std::fabs(v));
    }
    // block mean over the upper half of the table stands in for the tail
    std::size_t lo = table_size / 2;
    double acc = 0.0;
    for (std::size_t n = lo; n < table_size; ++n) acc += I.weight_table[n];
    I.weight_tail = table_size > lo ? acc / static_cast<double>(table_size - lo) : 0.0;
    (void)sup;
}

void check_tail_law(const Impl& I) {
    const TailLaw& tl = I.tail;
    if (!(tl.c > 0) || !(tl.q > 0) || !(tl.t0 >= 0) || !std::isfinite(tl.c) || !std::isfinite(tl.q))
        throw InvalidInput("tail_law needs c > 0, q > 0, t0 >= 0");
    double start = std::max(tl.t0, 1.0);
    for (int i = 0; i < 64; ++i) {
        double t = start * std::pow(10.0, 12.0 * i / 63.0);
        // sequences obey the law at their integer indices
        if (I.kind == ModelKind::diagonal_sequence) t = std::floor(t);
        double m = I.kind == ModelKind::diagonal_sequence
                       ? (std::floor(t) < I.table.size() ? I.table[static_cast<std::size_t>(t)]
                                                         : I.tail_mu(std::floor(t)))
                       : I.cont_mu(t);
        double bound = tl.c * std::pow(1.0 + t, -tl.q);
        if (m > bound * (1 + 1e-9))
            throw InvalidInput("tail_law violated at t=" + std::to_string(t) + ": mu=" + std::to_string(m) +
                               " > " + std::to_string(bound));
    }
}

void check_monotone(const std::vector<double>& v, const char* what) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        if (!std::isfinite(v[i]) || v[i] < 0)
            throw InvalidInput(std::string(what) + ": mu not finite/nonnegative at sample " + std::to_string(i));
        if (v[i + 1] > v[i] * (1 + 1e-12) + 1e-300)
            throw InvalidInput(std::string(what) + ": mu increases between samples " + std::to_string(i) +
                               " and " + std::to_string(i + 1));
    }
}

void build_prefix(Impl& I) {
    I.sorted = I.table;
    std::sort(I.sorted.begin(), I.sorted.end(), std::greater<>());
    I.prefix.assign(I.sorted.size() + 1, 0.0);
    // compensated summation keeps prefix sums at full precision
    double s = 0.0, c = 0.0;
    for (std::size_t i = 0; i < I.sorted.size(); ++i) {
        double y = I.sorted[i] - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
        I.prefix[i + 1] = s;
    }
}

void init_continuous(Impl& I) {
    double m0 = I.cont_mu(0.0);
    if (!std::isfinite(m0)) throw InvalidInput("mu_0 is not finite");
    std::vector<double> samples{m0};
    for (int i = 0; i < 256; ++i) samples.push_back(I.cont_mu(1e-3 * std::pow(10.0, 15.0 * i / 255.0)));
    check_monotone(samples, "model");
    // far samples in extended range
    XReal prev = I.cont_mu(XReal::exp_of(40.0));
    for (double u : {50.0, 100.0, 1e3, 1e4, 1e5, 1e6}) {
        XReal cur = I.cont_mu(XReal::exp_of(u));
        if (!cur.is_finite() || cur.sign() < 0 || cur > prev * XReal(1 + 1e-12))
            throw InvalidInput("model: mu not decreasing at t=e^" + std::to_string(u));
        prev = cur;
    }
    if (I.kind == ModelKind::integrated_form) I.F_at_zero = I.expr(0.0);
    I.head_integral = integrate([&](double t) { return I.cont_mu(t); }, 0.0, 1.0, 1e-14);
    check_tail_law(I);
}

std::shared_ptr<Impl> make_diagonal(const Expression& e, TailLaw tail, double power) {
    auto I = std::make_shared<Impl>();
    I->kind = ModelKind::diagonal_sequence;
    I->expr = e;
    I->tail = tail;
    I->power = power;
    double last = e(static_cast<double>(kDiagonalTable));
    I->tail_sign = last < 0 ? -1.0 : 1.0;
    I->table.resize(kDiagonalTable);
    for (std::size_t n = 0; n < kDiagonalTable; ++n) {
        double a = e(static_cast<double>(n));
        if (!std::isfinite(a)) throw InvalidInput("diagonal entry not finite at n=" + std::to_string(n));
        I->table[n] = std::pow(std::fabs(a), power);
    }
    build_prefix(*I);
    // the smooth tail must stay below the table and keep decreasing
    double floor_v = I->sorted.back();
    double prev = floor_v;
    for (int i = 0; i <= 48; ++i) {
        double n = std::floor(kDiagonalTable * std::pow(2.0, i));
        double v = to_double(I->tail_mu(XReal(n)));
        double raw = e(n);
        if (raw * I->tail_sign < 0) throw InvalidInput("diagonal tail changes sign near n=" + std::to_string(n));
        if (!std::isfinite(v) || v > prev * (1 + 1e-12) + 1e-300)
            throw InvalidInput("diagonal tail is not nonincreasing near n=" + std::to_string(n));
        prev = v;
    }
    return I;
}

std::shared_ptr<Impl> make_finite(std::vector<double> values, std::vector<double> eig) {
    auto I = std::make_shared<Impl>();
    I->kind = ModelKind::matrix;
    I->finite = true;
    I->table = std::move(values);
    I->eig = std::move(eig);
    build_prefix(*I);
    return I;
}

}  // namespace

SpectralModel SpectralModel::closed_form(const Expression& mu, TailLaw tail, std::optional<Expression> weight) {
    auto I = std::make_shared<Impl>();
    I->kind = ModelKind::closed_form_mu;
    I->expr = mu;
    I->tail = tail;
    setup_weight(*I, weight, 0);
    init_continuous(*I);
    return SpectralModel(I);
}

SpectralModel SpectralModel::integrated(const Expression& F, TailLaw tail, std::optional<Expression> weight) {
    auto I = std::make_shared<Impl>();
    I->kind = ModelKind::integrated_form;
    I->expr = F;
    I->tail = tail;
    setup_weight(*I, weight, 0);
    init_continuous(*I);
    return SpectralModel(I);
}

SpectralModel SpectralModel::diagonal(const Expression& entries, TailLaw tail, std::optional<Expression> weight) {
    auto I = make_diagonal(entries, tail, 1.0);
    setup_weight(*I, weight, kDiagonalTable);
    check_tail_law(*I);
    return SpectralModel(I);
}

SpectralModel SpectralModel::matrix(const Eigen::MatrixXd& m, std::optional<Expression> weight) {
    if (m.rows() == 0 || m.cols() == 0) throw InvalidInput("empty matrix");
    if (m.rows() > 4096 || m.cols() > 4096) throw InvalidInput("matrix larger than 4096");
    if (!m.allFinite()) throw InvalidInput("matrix has non-finite entries");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    Eigen::VectorXd sv = svd.singularValues();
    std::vector<double> values(sv.data(), sv.data() + sv.size());
    std::vector<double> eig;
    if (m.rows() == m.cols() && (m - m.transpose()).norm() <= 1e-12 * std::max(1.0, m.norm())) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
        eig.assign(es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
        std::sort(eig.begin(), eig.end(), [](double a, double b) { return std::fabs(a) > std::fabs(b); });
    } else {
        eig = values;
    }
    auto I = make_finite(values, eig);
    setup_weight(*I, weight, values.size());
    return SpectralModel(I);
}

SpectralModel SpectralModel::finite_diagonal(const std::vector<double>& entries, std::optional<Expression> weight) {
    if (entries.empty()) throw InvalidInput("empty diagonal");
    std::vector<double> values;
    for (double v : entries) {
        if (!std::isfinite(v)) throw InvalidInput("diagonal has non-finite entries");
        values.push_back(std::fabs(v));
    }
    auto I = make_finite(values, entries);
    setup_weight(*I, weight, values.size());
    return SpectralModel(I);
}

SpectralModel SpectralModel::power(double p) const {
    if (!(p > 0)) throw InvalidInput("power must be positive");
    if (p == 1.0) return *this;
    const Impl& I = *impl_;
    std::shared_ptr<Impl> J;
    if (I.finite) {
        std::vector<double> v = I.table;
        for (double& x : v) x = std::pow(x, p);
        std::vector<double> e = I.eig;
        for (double& x : e) x = std::copysign(std::pow(std::fabs(x), p), x);
        J = make_finite(v, e);
    } else if (I.kind == ModelKind::diagonal_sequence) {
        J = make_diagonal(I.expr, I.tail, I.power * p);
    } else {
        J = std::make_shared<Impl>(I);
        J->power = I.power * p;
        J->head_integral = integrate([&](double t) { return J->cont_mu(t); }, 0.0, 1.0, 1e-14);
    }
    J->tail = {std::pow(I.tail.c, p), I.tail.q * p, I.tail.t0};
    J->weight = I.weight;
    J->weight_is_const = I.weight_is_const;
    J->weight_value = I.weight_value;
    J->weight_tail = I.weight_tail;
    J->weight_table = I.weight_table;
    return SpectralModel(J);
}

ModelKind SpectralModel::kind() const { return impl_->kind; }
const TailLaw& SpectralModel::tail_law() const { return impl_->tail; }
bool SpectralModel::finite_rank() const { return impl_->finite; }
std::size_t SpectralModel::rank() const {
    const Impl& I = *impl_;
    return static_cast<std::size_t>(std::count_if(I.table.begin(), I.table.end(), [](double v) { return v > 0; }));
}
double SpectralModel::exponent() const { return impl_->power; }
double SpectralModel::abscissa() const { return impl_->finite ? 0.0 : 1.0 / impl_->tail.q; }
bool SpectralModel::weighted() const { return impl_->weight.has_value(); }
bool SpectralModel::weight_constant() const { return impl_->weight_is_const; }
double SpectralModel::weight_at(double n) const { return impl_->weight_n(static_cast<std::size_t>(n)); }
double SpectralModel::weight_tail_mean() const { return impl_->weight_tail; }
const std::vector<double>& SpectralModel::entries() const { return impl_->table; }
const std::vector<double>& SpectralModel::sorted_entries() const { return impl_->sorted; }

std::string SpectralModel::describe() const {
    std::ostringstream os;
    const Impl& I = *impl_;
    os << to_string(I.kind);
    if (!I.finite) os << " " << I.expr.text();
    else os << " rank " << rank();
    if (I.power != 1.0) os << " ^" << I.power;
    return os.str();
}

std::vector<double> SpectralModel::eigenvalues(std::size_t max_count) const {
    const Impl& I = *impl_;
    if (I.finite) {
        std::vector<double> e = I.eig;
        if (e.size() > max_count) e.resize(max_count);
        return e;
    }
    if (I.kind != ModelKind::diagonal_sequence) throw InvalidInput("continuous models have no enumerable spectrum");
    std::vector<double> e;
    for (std::size_t n = 0; n < max_count; ++n) {
        double a = I.expr(static_cast<double>(n));
        e.push_back(std::copysign(std::pow(std::fabs(a), I.power), a));
    }
    return e;
}

double SpectralModel::mu(double t) const { return mu(XReal(t)).to_double(); }

XReal SpectralModel::mu(const XReal& t) const {
    const Impl& I = *impl_;
    if (t.sign() < 0 || !t.is_finite()) throw DomainError("mu_t needs t >= 0");
    if (I.continuous()) {
        XReal v = I.cont_mu(t);
        if (!v.is_finite()) throw DomainError("closed form undefined at t=" + std::to_string(t.to_double()));
        return v;
    }
    if (t < XReal(static_cast<double>(I.sorted.size()))) return XReal(I.sorted[static_cast<std::size_t>(t.to_double())]);
    if (I.finite) return XReal();
    XReal n = t < XReal(9007199254740992.0) ? XReal(std::floor(t.to_double())) : t;
    return I.tail_mu(n);
}

double psi(double p, double t) {
    if (t <= 1.0) return t;
    return std::pow(t, 1.0 - 1.0 / p);
}

double mu_at(const SpectralModel& m, double t) { return m.mu(t); }
XReal mu_at(const SpectralModel& m, const XReal& t) { return m.mu(t); }

namespace {

double continuous_F(const Impl& I, const XReal& t) {
    if (I.kind == ModelKind::integrated_form && I.power == 1.0) return to_double(I.expr(t)) - I.F_at_zero;
    auto mu = [&](const auto& x) { return I.cont_mu(x); };
    if (t <= XReal(1.0)) return integrate([&](double s) { return I.cont_mu(s); }, 0.0, t.to_double(), 1e-14);
    return I.head_integral + integrate_log_range(mu, 1.0, t);
}

double discrete_F(const Impl& I, const XReal& t) {
    std::size_t N = I.sorted.size();
    if (t < XReal(static_cast<double>(N))) {
        double td = t.to_double();
        std::size_t m = static_cast<std::size_t>(td);
        return I.prefix[m] + (td - static_cast<double>(m)) * I.sorted[m];
    }
    if (I.finite) return I.prefix[N];
    auto mu = [&](const auto& x) { return I.tail_mu(x); };
    if (t < XReal(9007199254740992.0)) {
        double td = t.to_double();
        double m = std::floor(td);
        return I.prefix[N] + euler_maclaurin_range(mu, static_cast<double>(N), XReal(m)) +
               (td - m) * I.tail_mu(m);
    }
    return I.prefix[N] + euler_maclaurin_range(mu, static_cast<double>(N), t);
}

}  // namespace

double integral_mu(const SpectralModel& m, const XReal& t) {
    if (t.sign() < 0 || !t.is_finite()) throw DomainError("F(t) needs t >= 0");
    const Impl& I = m.impl();
    return I.continuous() ? continuous_F(I, t) : discrete_F(I, t);
}

double integral_mu(const SpectralModel& m, double t) { return integral_mu(m, XReal(t)); }

XReal distribution_at(const SpectralModel& m, const XReal& u) {
    if (!(u.sign() > 0)) throw DomainError("distribution function needs u > 0");
    const Impl& I = m.impl();
    if (!I.continuous()) {
        auto it = std::partition_point(I.sorted.begin(), I.sorted.end(), [&](double v) { return XReal(v) > u; });
        std::size_t count = static_cast<std::size_t>(it - I.sorted.begin());
        if (count < I.sorted.size() || I.finite) return XReal(static_cast<double>(count));
        // the whole table exceeds u: locate the crossing on the smooth tail
        double lo = std::log(static_cast<double>(I.sorted.size())), hi = lo + 1.0;
        while (I.tail_mu(XReal::exp_of(hi)) > u) {
            lo = hi;
            hi = lo + 2.0 * (hi - std::log(static_cast<double>(I.sorted.size())) + 1.0);
            if (hi > 1e17) throw DomainError("distribution function: mu never drops below u");
        }
        for (int it2 = 0; it2 < 400 && hi - lo > 1e-15 * std::max(1.0, hi); ++it2) {
            double mid = 0.5 * (lo + hi);
            if (I.tail_mu(XReal::exp_of(mid)) > u) lo = mid;
            else hi = mid;
        }
        XReal x = XReal::exp_of(hi);
        if (x < XReal(4503599627370496.0)) {
            double n = std::ceil(x.to_double());
            double N = static_cast<double>(I.sorted.size());
            while (n - 1 >= N && !(I.tail_mu(XReal(n - 1)) > u)) n -= 1;
            while (I.tail_mu(XReal(n)) > u) n += 1;
            return XReal(n);
        }
        return x;
    }
    if (!(I.cont_mu(XReal(0.0)) > u)) return XReal();
    if (!(I.cont_mu(XReal(1.0)) > u)) {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
            double mid = 0.5 * (lo + hi);
            if (I.cont_mu(XReal(mid)) > u) lo = mid;
            else hi = mid;
        }
        return XReal(hi);
    }
    double lo = 0.0, hi = 1.0;
    while (I.cont_mu(XReal::exp_of(hi)) > u) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e17) throw DomainError("distribution function: mu never drops below u");
    }
    for (int it = 0; it < 400 && hi - lo > 4e-16 * std::max(1.0, hi); ++it) {
        double mid = 0.5 * (lo + hi);
        if (I.cont_mu(XReal::exp_of(mid)) > u) lo = mid;
        else hi = mid;
    }
    return XReal::exp_of(hi);
}

double distribution_at(const SpectralModel& m, double u) { return distribution_at(m, XReal(u)).to_double(); }

double cutoff_trace(const SpectralModel& m, const XReal& u) {
    const Impl& I = m.impl();
    XReal lambda = distribution_at(m, u);
    double value = integral_mu(m, lambda);
    double direct = std::numeric_limits<double>::quiet_NaN();
    if (!I.continuous() && lambda < XReal(static_cast<double>(I.sorted.size()) + 0.5)) {
        direct = 0.0;
        for (double v : I.sorted) {
            if (!(XReal(v) > u)) break;
            direct += v;
        }
    } else if (I.kind == ModelKind::integrated_form && I.power == 1.0 && lambda < XReal(1e12)) {
        // F is given in closed form; integrate its derivative independently
        double L = lambda.to_double();
        auto mu = [&](const auto& x) { return I.cont_mu(x); };
        direct = L <= 1.0 ? integrate([&](double s) { return I.cont_mu(s); }, 0.0, L, 1e-14)
                          : I.head_integral + integrate_log_range(mu, 1.0, lambda);
    }
    if (std::isfinite(direct) && std::fabs(direct - value) > 1e-9 * std::max(1e-300, std::fabs(direct)))
        throw Inconsistency("cutoff trace " + std::to_string(value) + " differs from direct spectral sum " +
                            std::to_string(direct));
    return value;
}

double cutoff_trace(const SpectralModel& m, double u) { return cutoff_trace(m, XReal(u)); }

std::vector<double> log_grid(double lo, double hi, int per_decade) {
    if (!(lo > 0) || !(hi >= lo) || per_decade < 1) throw InvalidInput("log grid needs 0 < lo <= hi");
    std::vector<double> g;
    double decades = std::log10(hi / lo);
    int n = static_cast<int>(std::ceil(decades * per_decade - 1e-9));
    for (int i = 0; i <= n; ++i) g.push_back(i == n ? hi : lo * std::pow(10.0, static_cast<double>(i) / per_decade));
    return g;
}

namespace {

// log-slope of v against t over the last two decades of the grid
double tail_growth(const std::vector<double>& t, const std::vector<double>& v) {
    double tmax = t.back();
    std::size_t i0 = 0;
    while (i0 + 1 < t.size() && t[i0] < tmax / 100.0) ++i0;
    if (v[i0] <= 0 || v.back() <= 0) return 0.0;
    return std::log(v.back() / v[i0]) / std::log(tmax / t[i0]);
}

}  // namespace

IdealParams ideal_norm(const SpectralModel& m, IdealParams params, const std::vector<double>& t_grid) {
    if (t_grid.size() < 2 || std::log10(t_grid.back() / t_grid.front()) < 12.0 - 1e-9)
        throw InvalidInput("ideal norm grid must cover at least 12 decades");
    if (!(params.p >= 1.0)) throw InvalidInput("ideal exponent p must be >= 1");
    std::vector<double> ratio, tmu;
    for (double t : t_grid) {
        double F = integral_mu(m, t);
        double den = params.p == 1.0 ? std::log1p(t) : psi(params.p, t);
        ratio.push_back(F / den);
        tmu.push_back(t * m.mu(t));
    }
    auto it = std::max_element(ratio.begin(), ratio.end());
    params.norm_estimate = *it;
    params.argmax_t = t_grid[static_cast<std::size_t>(it - ratio.begin())];
    // power-law growth across the last decades means the sup is not finite
    params.in_ideal = tail_growth(t_grid, ratio) <= 0.1;
    params.small_ideal_C = *std::max_element(tmu.begin(), tmu.end());
    params.small_ideal = tail_growth(t_grid, tmu) <= 0.1;
    if (params.K == 0.0) params.K = params.norm_estimate;
    if (params.C == 0.0) params.C = params.norm_estimate;
    return params;
}

namespace {

double discrete_sum(const Impl& I, const std::function<double(double)>& g,
                    const std::function<double(std::size_t)>& w, double w_tail, std::size_t direct_terms,
                    const std::function<double(double)>& em_tail) {
    double acc = 0.0, c = 0.0;
    std::size_t N = I.finite ? I.table.size() : std::max(direct_terms, I.table.size());
    for (std::size_t n = 0; n < N; ++n) {
        double mu = n < I.table.size() ? I.table[n] : to_double(I.tail_mu(static_cast<double>(n)));
        if (mu <= 0) continue;
        double term = w(n) * g(mu);
        double y = term - c;
        double t = acc + y;
        c = (t - acc) - y;
        acc = t;
    }
    if (I.finite) return acc;
    return acc + w_tail * em_tail(static_cast<double>(N));
}

}  // namespace

double zeta_with_weight(const SpectralModel& m, double s, const WeightFn& w) {
    const Impl& I = m.impl();
    if (!(s > m.abscissa()))
        throw DivergenceError("zeta(s) diverges for s <= " + std::to_string(m.abscissa()), m.abscissa());
    if (I.continuous()) {
        double c = w.at ? w.at(0.0) : 1.0;
        auto f = [&](double t) { return std::pow(I.cont_mu(t), s); };
        double head = integrate(f, 0.0, 1.0, 1e-14);
        double tail = integrate_to_infinity(
            [&](double u) {
                XReal x = XReal::exp_of(u);
                return to_double(pow(I.cont_mu(x), s) * x);
            },
            0.0);
        return c * (head + tail);
    }
    auto g = [s](double mu) { return std::pow(mu, s); };
    auto em = [&](double a) {
        auto f = [&](const auto& x) {
            using std::pow;
            return pow(I.tail_mu(x), s);
        };
        return euler_maclaurin_tail(f, a);
    };
    auto wn = [&](std::size_t n) { return w.at ? w.at(static_cast<double>(n)) : 1.0; };
    return discrete_sum(I, g, wn, w.at ? w.tail : 1.0, kDiagonalTable, em);
}

double zeta(const SpectralModel& m, double s, const ZetaOptions& opt) {
    const Impl& I = m.impl();
    if (!(s > m.abscissa()))
        throw DivergenceError("zeta(s) diverges for s <= " + std::to_string(m.abscissa()), m.abscissa());
    if (I.continuous()) {
        WeightFn w;
        if (opt.use_weight && I.weight) {
            w.at = [&](double) { return I.weight_value; };
            w.tail = I.weight_value;
        }
        return zeta_with_weight(m, s, w);
    }
    auto g = [s](double mu) { return std::pow(mu, s); };
    auto em = [&](double a) {
        auto f = [&](const auto& x) {
            using std::pow;
            return pow(I.tail_mu(x), s);
        };
        return euler_maclaurin_tail(f, a);
    };
    bool use_w = opt.use_weight && I.weight;
    auto wn = [&](std::size_t n) { return use_w ? I.weight_n(n) : 1.0; };
    return discrete_sum(I, g, wn, use_w ? I.weight_tail : 1.0, opt.direct_terms, em);
}

double zeta_weighted(const SpectralModel& m, double s) {
    ZetaOptions o;
    o.use_weight = true;
    return zeta(m, s, o);
}

double heat_trace(const SpectralModel& m, double lambda, double p, bool weighted) {
    if (!(lambda > 0)) throw DomainError("heat trace needs lambda > 0");
    if (!(p >= 1.0)) throw DomainError("heat trace needs p >= 1");
    const Impl& I = m.impl();
    double c = std::pow(lambda, -2.0 / p);
    bool use_w = weighted && I.weight;
    if (I.continuous()) {
        double wc = use_w ? I.weight_value : 1.0;
        auto f = [&](double t) {
            double mu = I.cont_mu(t);
            return mu > 0 ? std::exp(-c / (mu * mu)) : 0.0;
        };
        double head = integrate(f, 0.0, 1.0, 1e-14);
        double tail = integrate_to_infinity(
            [&](double u) {
                XReal x = XReal::exp_of(u);
                XReal mu = I.cont_mu(x);
                if (mu.is_zero()) return 0.0;
                XReal arg = XReal(c) / (mu * mu);
                if (arg > XReal(800.0)) return 0.0;
                return to_double(XReal(std::exp(-arg.to_double())) * x);
            },
            0.0);
        return wc * (head + tail);
    }
    auto g = [c](double mu) { return std::exp(-c / (mu * mu)); };
    auto em = [&](double a) {
        double first = std::exp(-c / std::pow(to_double(I.tail_mu(a)), 2.0));
        if (first < 1e-300) return 0.0;
        auto f = [&](const auto& x) {
            using std::exp;
            using std::pow;
            return exp(-c * pow(I.tail_mu(x), -2.0));
        };
        return euler_maclaurin_tail(f, a);
    };
    auto wn = [&](std::size_t n) { return use_w ? I.weight_n(n) : 1.0; };
    return discrete_sum(I, g, wn, use_w ? I.weight_tail : 1.0, kDiagonalTable, em);
}

SubmajorizationReport submajorizes(const SpectralModel& f, const SpectralModel& g, const std::vector<double>& grid) {
    SubmajorizationReport r;
    for (double t : grid) {
        double d = integral_mu(f, t) - integral_mu(g, t);
        if (d > r.max_violation) {
            r.max_violation = d;
            r.worst_t = t;
        }
    }
    r.holds = r.max_violation <= 1e-12;
    return r;
}

IdealBoundReport ideal_bound_check(const SpectralModel& m, const std::vector<double>& p_grid,
                            const std::vector<double>& t_grid, std::optional<double> K) {
    IdealBoundReport r;
    if (K) {
        r.K = *K;
    } else {
        IdealParams ip = ideal_norm(m, IdealParams{}, log_grid(1e-3, 1e12, 8));
        if (!ip.in_ideal) throw NotInIdeal("model is not in L^(1,inf); no constant K exists");
        r.K = ip.norm_estimate;
    }
    for (double p : p_grid) {
        if (!(p >= 1.0)) throw InvalidInput("ideal bound exponents must be >= 1");
        SpectralModel mp = m.power(p);
        for (double t : t_grid) {
            double lhs = integral_mu(mp, t);
            double G = p == 1.0 ? std::log1p(t) : -std::expm1((1.0 - p) * std::log1p(t)) / (p - 1.0);
            double ratio = lhs / (std::pow(r.K, p) * G);
            if (ratio > r.worst_ratio) {
                r.worst_ratio = ratio;
                r.worst_p = p;
                r.worst_t = t;
            }
        }
    }
    r.holds = r.worst_ratio <= 1.0 + 1e-9;
    return r;
}

DistributionBoundReport distribution_bound_check(const SpectralModel& m, double C, const std::vector<double>& t_grid) {
    DistributionBoundReport r;
    if (!(C > 0)) throw InvalidInput("distribution bound constant must be positive");
    std::vector<double> t = t_grid;
    std::sort(t.begin(), t.end());
    std::optional<std::size_t> first_ok;
    for (std::size_t i = 0; i < t.size(); ++i) {
        bool ok = false;
        double bound = C * t[i] * std::log(t[i]);
        double lam = 0.0;
        if (t[i] > 1.0) {
            lam = distribution_at(m, XReal(1.0 / t[i])).to_double();
            ok = lam <= bound;
        }
        if (ok && !first_ok) first_ok = i;
        if (!ok) first_ok.reset();
        r.worst_ratio = bound > 0 ? lam / bound : std::numeric_limits<double>::infinity();
    }
    r.max_t_tested = t.empty() ? 0.0 : t.back();
    r.holds = first_ok.has_value();
    r.from_t = first_ok ? t[*first_ok] : r.max_t_tested;
    return r;
}

}  // namespace singtrace
