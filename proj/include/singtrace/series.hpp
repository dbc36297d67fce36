#pragma once

// Euler-Maclaurin summation for smooth summands.
// Summands are generic callables accepted with double, XReal and Jet
// arguments; derivatives come from Taylor jets, integrals are taken in
// u = ln x so that x may run far past the double range.

#include <cmath>
#include <limits>

#include "singtrace/jet.hpp"
#include "singtrace/quadrature.hpp"
#include "singtrace/xreal.hpp"

namespace singtrace {

constexpr int kEulerJetOrder = 8;

namespace detail {

// B_{2k} / (2k) for k = 1..4; multiplies c[2k-1] = f^(2k-1) / (2k-1)!
constexpr double kBernoulliOver2k[4] = {1.0 / 12.0, -1.0 / 120.0, 1.0 / 252.0, -1.0 / 240.0};

template <class F, class S>
S derivative_correction(F& f, const S& x) {
    using J = Jet<S, kEulerJetOrder>;
    J j = f(J::variable(x));
    S acc(0.0);
    for (int k = 1; k <= 4; ++k) acc = acc + S(kBernoulliOver2k[k - 1]) * j.c[2 * k - 1];
    return acc;
}

template <class F>
double log_integrand(F& f, double u) {
    XReal x = XReal::exp_of(u);
    return to_double(f(x) * x);
}

}  // namespace detail

// Integral of f over [a, b] with a >= 1, via u = ln x.
template <class F>
double integrate_log_range(F&& f, double a, const XReal& b) {
    double ua = std::log(a), ub = log(b).to_double();
    if (ub <= ua) return 0.0;
    double total = 0.0, lo = ua, w = 1.0;
    while (lo < ub) {
        double hi = std::min(ub, lo + w);
        total += integrate([&](double u) { return detail::log_integrand(f, u); }, lo, hi, 1e-14,
                           1e-16 * std::fabs(total));
        lo = hi;
        w *= 2.0;
    }
    return total;
}

// sum_{n >= a} f(n) for integer a >= 1 with f smooth and decaying beyond a.
template <class F>
double euler_maclaurin_tail(F&& f, double a) {
    double integral = integrate_to_infinity([&](double u) { return detail::log_integrand(f, u); },
                                            std::log(a));
    double fa = to_double(f(a));
    return integral + 0.5 * fa - detail::derivative_correction(f, a);
}

// sum_{a <= n < b} f(n); direct below 2^16 terms, Euler-Maclaurin above.
template <class F>
double euler_maclaurin_range(F&& f, double a, const XReal& b) {
    if (!(XReal(a) < b)) return 0.0;
    XReal span = b - XReal(a);
    if (span < XReal(65536.0)) {
        double acc = 0.0;
        double end = b.to_double();
        for (double n = a; n < end; n += 1.0) acc += to_double(f(n));
        return acc;
    }
    double integral = integrate_log_range(f, a, b);
    double fa = to_double(f(a));
    double fb = to_double(f(b));
    double ca = detail::derivative_correction(f, a);
    double cb = to_double(detail::derivative_correction(f, b));
    return integral + 0.5 * (fa - fb) + (cb - ca);
}

}  // namespace singtrace
