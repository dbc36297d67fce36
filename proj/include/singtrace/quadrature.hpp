#pragma once

#include <cmath>
#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

#include "singtrace/errors.hpp"

namespace singtrace {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Gauss-Legendre rule of order n, computed once per n and cached.
const GaussRule& gauss_legendre(int n);

template <class F>
double integrate_fixed(F&& f, double a, double b, int order = 20) {
    static const GaussRule& g20 = gauss_legendre(20);
    const GaussRule& g = order == 20 ? g20 : gauss_legendre(order);
    double h = 0.5 * (b - a), m = 0.5 * (a + b);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) acc += g.weights[i] * f(m + h * g.nodes[i]);
    return acc * h;
}

struct QuadStats {
    double error_estimate = 0.0;
    int intervals = 0;
};

namespace detail {

struct Panel {
    double value;
    double mass;  // integral of |f|, sets the rounding floor
};

template <class F>
Panel panel(F& f, double a, double b) {
    static const GaussRule& g = gauss_legendre(20);
    double h = 0.5 * (b - a), m = 0.5 * (a + b);
    double acc = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        double v = g.weights[i] * f(m + h * g.nodes[i]);
        acc += v;
        mass += std::fabs(v);
    }
    return {acc * h, mass * std::fabs(h)};
}

template <class F>
double adapt(F& f, double a, double b, double whole, double abs_tol, double rel_tol, int depth,
             QuadStats& st) {
    double m = 0.5 * (a + b);
    Panel l = panel(f, a, m);
    Panel r = panel(f, m, b);
    double both = l.value + r.value;
    double err = std::fabs(both - whole);
    // rounding in f and in the abscissae themselves
    double span = std::max(1.0, std::max(std::fabs(a), std::fabs(b)) / (b - a));
    double floor = 64.0 * std::numeric_limits<double>::epsilon() * span * (l.mass + r.mass);
    if (err <= std::max({abs_tol, rel_tol * std::fabs(both), floor}) || depth <= 0 || m <= a || m >= b) {
        st.error_estimate += err;
        st.intervals += 2;
        return both;
    }
    return adapt(f, a, m, l.value, 0.5 * abs_tol, rel_tol, depth - 1, st) +
           adapt(f, m, b, r.value, 0.5 * abs_tol, rel_tol, depth - 1, st);
}

}  // namespace detail

// Adaptive bisection on 20-point Gauss-Legendre panels.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-13, double abs_tol = 0.0,
                 int max_depth = 48, QuadStats* stats = nullptr) {
    if (a == b) return 0.0;
    QuadStats st;
    auto whole = detail::panel(f, a, b);
    // floor for integrals that cancel to ~0
    abs_tol = std::max(abs_tol, 1e-3 * rel_tol * whole.mass);
    double v = detail::adapt(f, a, b, whole.value, abs_tol, rel_tol, max_depth, st);
    if (stats) *stats = st;
    return v;
}

// Integral over [u0, inf) on doubling segments. Stops once two consecutive
// segments contribute less than rel_tol of the running total; throws
// DivergenceError if that never happens before u_limit.
template <class F>
double integrate_to_infinity(F&& g, double u0, double rel_tol = 1e-15, double u_limit = 1e18,
                             double first_width = 1.0) {
    double total = 0.0;
    double w = first_width;
    double a = u0;
    int quiet = 0;
    double prev = std::numeric_limits<double>::infinity();
    while (a < u_limit) {
        double b = a + w;
        double seg = integrate(g, a, b, 1e-13, 1e-14 * std::fabs(total));
        if (!std::isfinite(seg)) throw DivergenceError("non-finite integrand on tail segment", a);
        total += seg;
        if (std::fabs(seg) <= rel_tol * std::fabs(total) && std::fabs(seg) <= prev) {
            if (++quiet >= 2) return total;
        } else {
            quiet = 0;
        }
        prev = std::fabs(seg);
        a = b;
        w *= 2.0;
    }
    throw DivergenceError("tail integral does not settle", u0);
}

}  // namespace singtrace
