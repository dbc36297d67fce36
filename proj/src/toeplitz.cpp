#include "singtrace/toeplitz.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <unsupported/Eigen/FFT>

#include "singtrace/errors.hpp"
#include "singtrace/quadrature.hpp"

namespace singtrace {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr int kFftSamples = 1 << 14;

cplx e2pi(double x) { return std::polar(1.0, kTwoPi * x); }

// c_k from n samples, k in (-n/2, n/2]
std::map<int, cplx> dft_coefficients(const std::vector<cplx>& v) {
    int n = static_cast<int>(v.size());
    Eigen::FFT<double> fft;
    std::vector<cplx> X;
    fft.fwd(X, v);
    std::map<int, cplx> c;
    for (int j = 0; j < n; ++j) {
        int k = j <= n / 2 ? j : j - n;
        c[k] = X[j] / static_cast<double>(n);
    }
    return c;
}

}  // namespace

struct Symbol::Impl {
    std::function<cplx(double)> eval;
    std::optional<std::map<int, cplx>> coeffs;
    std::string text;
};

Symbol Symbol::fourier(const std::map<int, cplx>& coeffs) {
    if (coeffs.empty()) throw InvalidInput("symbol needs at least one Fourier coefficient");
    auto impl = std::make_shared<Impl>();
    impl->coeffs = coeffs;
    impl->eval = [coeffs](double s) {
        cplx acc = 0;
        for (const auto& [k, c] : coeffs) acc += c * e2pi(k * s);
        return acc;
    };
    std::ostringstream os;
    os << "fourier[";
    bool first = true;
    for (const auto& [k, c] : coeffs) {
        os << (first ? "" : " ") << k << ":" << c.real() << (c.imag() < 0 ? "" : "+") << c.imag() << "i";
        first = false;
    }
    os << "]";
    impl->text = os.str();
    return Symbol(std::move(impl));
}

Symbol Symbol::exponential(int n) {
    Symbol s = fourier({{n, cplx(1.0, 0.0)}});
    auto impl = std::make_shared<Impl>(*s.impl_);
    impl->text = "exp(2 pi i " + std::to_string(n) + " s)";
    return Symbol(std::move(impl));
}

Symbol Symbol::expression(const Expression& re, const Expression& im) {
    auto impl = std::make_shared<Impl>();
    impl->eval = [re, im](double s) { return cplx(re(s), im(s)); };
    impl->text = "(" + re.text() + ") + i(" + im.text() + ")";
    return Symbol(std::move(impl));
}

Symbol Symbol::unitarized() const {
    auto impl = std::make_shared<Impl>();
    auto f = impl_->eval;
    impl->eval = [f](double s) {
        cplx v = f(s);
        return v / std::abs(v);
    };
    impl->text = "polar(" + impl_->text + ")";
    return Symbol(std::move(impl));
}

Symbol Symbol::conj() const {
    auto impl = std::make_shared<Impl>();
    if (impl_->coeffs) {
        std::map<int, cplx> d;
        for (const auto& [k, c] : *impl_->coeffs) d[-k] = std::conj(c);
        Symbol s = fourier(d);
        impl = std::make_shared<Impl>(*s.impl_);
    } else {
        auto f = impl_->eval;
        impl->eval = [f](double s) { return std::conj(f(s)); };
    }
    impl->text = "conj(" + impl_->text + ")";
    return Symbol(std::move(impl));
}

Symbol operator*(const Symbol& a, const Symbol& b) {
    auto impl = std::make_shared<Symbol::Impl>();
    if (a.impl_->coeffs && b.impl_->coeffs) {
        std::map<int, cplx> c;
        for (const auto& [i, x] : *a.impl_->coeffs)
            for (const auto& [j, y] : *b.impl_->coeffs) c[i + j] += x * y;
        Symbol s = Symbol::fourier(c);
        impl = std::make_shared<Symbol::Impl>(*s.impl_);
    } else {
        auto f = a.impl_->eval, g = b.impl_->eval;
        impl->eval = [f, g](double s) { return f(s) * g(s); };
    }
    impl->text = a.impl_->text + " * " + b.impl_->text;
    return Symbol(std::move(impl));
}

cplx Symbol::operator()(double s) const { return impl_->eval(s); }
bool Symbol::trig_polynomial() const { return impl_->coeffs.has_value(); }
const std::string& Symbol::describe() const { return impl_->text; }

std::map<int, cplx> Symbol::coefficients(int max_abs_k) const {
    std::map<int, cplx> out;
    if (impl_->coeffs) {
        for (const auto& [k, c] : *impl_->coeffs)
            if (std::abs(k) <= max_abs_k) out[k] = c;
        return out;
    }
    for (const auto& [k, c] : dft_coefficients(samples(kFftSamples)))
        if (std::abs(k) <= max_abs_k) out[k] = c;
    return out;
}

std::vector<cplx> Symbol::samples(int n) const {
    std::vector<cplx> v(n);
    for (int j = 0; j < n; ++j) v[j] = impl_->eval(static_cast<double>(j) / n);
    return v;
}

std::vector<cplx> Symbol::derivative_samples(int n) const {
    std::vector<cplx> d(n);
    if (impl_->coeffs) {
        for (int j = 0; j < n; ++j) {
            double s = static_cast<double>(j) / n;
            cplx acc = 0;
            for (const auto& [k, c] : *impl_->coeffs) acc += cplx(0, kTwoPi * k) * c * e2pi(k * s);
            d[j] = acc;
        }
        return d;
    }
    // spectral differentiation; the Nyquist mode is dropped
    Eigen::FFT<double> fft;
    std::vector<cplx> X;
    fft.fwd(X, samples(n));
    for (int j = 0; j < n; ++j) {
        int k = j < n / 2 ? j : j - n;
        X[j] *= j == n / 2 ? cplx(0) : cplx(0, kTwoPi * k);
    }
    fft.inv(d, X);
    return d;
}

namespace {

double unwrap(const Symbol& u, double s0, cplx v0, double s1, cplx v1, int depth) {
    double d = std::arg(v1 / v0);
    if (std::fabs(d) <= 0.5 * M_PI) return d;
    if (depth >= 30) throw Inconclusive("phase unwrapping did not resolve a jump near s = " + std::to_string(s0));
    double sm = 0.5 * (s0 + s1);
    cplx vm = u(sm);
    return unwrap(u, s0, v0, sm, vm, depth + 1) + unwrap(u, sm, vm, s1, v1, depth + 1);
}

void require_nonvanishing(const std::vector<cplx>& v, double eps0) {
    double lo = std::abs(v[0]), hi = lo;
    for (const auto& x : v) {
        lo = std::min(lo, std::abs(x));
        hi = std::max(hi, std::abs(x));
    }
    if (!(lo > eps0 * hi)) throw InvalidInput("symbol (nearly) vanishes on the circle");
}

}  // namespace

int winding_number(const Symbol& u, double eps0) {
    auto v = u.samples(kCircleSamples);
    require_nonvanishing(v, eps0);
    double total = 0;
    for (int j = 0; j < kCircleSamples; ++j) {
        int k = (j + 1) % kCircleSamples;
        double s0 = static_cast<double>(j) / kCircleSamples, s1 = static_cast<double>(j + 1) / kCircleSamples;
        total += unwrap(u, s0, v[j], s1, v[k], 0);
    }
    double w = total / kTwoPi;
    double r = std::round(w);
    if (std::fabs(w - r) > 1e-6) throw Inconclusive("winding residual " + std::to_string(w - r) + " exceeds 1e-6");
    return static_cast<int>(r);
}

double trace_formula_index(const Symbol& u) {
    auto v = u.samples(kCircleSamples);
    for (const auto& x : v)
        if (std::fabs(std::abs(x) - 1.0) > 1e-10) throw InvalidInput("trace_formula_index needs a unitary-valued symbol");
    auto dv = u.derivative_samples(kCircleSamples);
    cplx acc = 0;
    // (u*)' = conj(u')
    for (int j = 0; j < kCircleSamples; ++j) acc += v[j] * std::conj(dv[j]);
    acc /= static_cast<double>(kCircleSamples);
    double value = (acc / cplx(0, kTwoPi)).real();
    if (std::fabs(value - std::round(value)) > 1e-8)
        throw Inconclusive("trace formula value " + std::to_string(value) + " is not within 1e-8 of an integer");
    return value;
}

namespace {

std::vector<double> toeplitz_singular_values(const std::map<int, cplx>& c, int N) {
    Eigen::MatrixXcd T = Eigen::MatrixXcd::Zero(N, N);
    for (const auto& [k, v] : c) {
        if (std::abs(k) >= N) continue;
        for (int j = std::max(0, k); j < std::min(N, N + k); ++j) T(j, j - k) = v;
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(T);
    auto s = svd.singularValues();
    return std::vector<double>(s.data(), s.data() + s.size());
}

}  // namespace

NearKernel truncated_near_kernel(const Symbol& u, int N, double eps) {
    if (N < 64 || (N & (N - 1)) != 0) throw InvalidInput("truncation size must be a power of two >= 64");
    NearKernel r;
    r.sign_hint = -winding_number(u);
    auto c = u.coefficients(2 * N);
    auto count = [&](int n, double* regular) {
        auto s = toeplitz_singular_values(c, n);
        int k = 0;
        double reg = std::numeric_limits<double>::infinity();
        for (double x : s) {
            if (x < eps) ++k;
            else reg = std::min(reg, x);
        }
        if (regular) *regular = reg;
        return k;
    };
    r.count = count(N, &r.smallest_regular);
    r.count_2N = count(2 * N, nullptr);
    if (r.count != r.count_2N)
        throw Inconclusive("near-kernel count " + std::to_string(r.count) + " at N = " + std::to_string(N) +
                           " differs from " + std::to_string(r.count_2N) + " at 2N");
    return r;
}

double commutator_diagonal(const Symbol& u) {
    // (u[D,u*])_kk = sum_l l |c_-l|^2 for every k
    double acc = 0;
    for (const auto& [k, c] : u.coefficients(kFftSamples / 2)) acc -= k * std::norm(c);
    return acc;
}

ZetaFlow zeta_index(const Symbol& u, double tol) { return constant_diagonal_zeta(commutator_diagonal(u), tol); }

CrossedTrace crossed_trace_check(double a, const std::function<double(double)>& f, const GridHalfLine& grid,
                                 const Decay& decay, double coverage_tol) {
    if (!(grid.h > 0) || !(grid.lambda > 0)) throw InvalidInput("grid needs h > 0 and lambda > 0");
    if (grid.lambda / grid.h > 1e9) throw InvalidInput("grid has more than 2e9 points");
    CrossedTrace r;
    double L = grid.lambda;
    switch (decay.kind) {
        case Decay::Kind::gaussian: r.tail_bound = decay.C * std::sqrt(kTwoPi) * std::erfc(L / std::sqrt(2.0)); break;
        case Decay::Kind::algebraic:
            if (!(decay.q > 1)) throw InvalidInput("algebraic decay needs q > 1");
            r.tail_bound = 2 * decay.C * std::pow(L, 1 - decay.q) / (decay.q - 1);
            break;
    }
    double mass = integrate(f, -1.0, 1.0, 1e-14);
    auto side = [&](double sign) {
        return integrate_to_infinity([&](double v) { return f(sign * std::exp(v)) * std::exp(v); }, 0.0, 1e-15);
    };
    mass += side(1.0) + side(-1.0);
    if (r.tail_bound > coverage_tol * std::max(std::fabs(mass), 1e-300))
        throw InvalidInput("grid does not cover the declared decay: tail bound " + std::to_string(r.tail_bound));
    long n = static_cast<long>(std::floor(L / grid.h));
    double acc = f(0.0);
    for (long k = n; k >= 1; --k) acc += f(k * grid.h) + f(-k * grid.h);
    r.lhs = a * grid.h * acc;
    r.rhs = a * mass;
    r.rel_err = r.rhs == 0.0 ? std::fabs(r.lhs) : std::fabs(r.lhs - r.rhs) / std::fabs(r.rhs);
    return r;
}

}  // namespace singtrace
