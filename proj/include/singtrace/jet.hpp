#pragma once

// Truncated Taylor series: c[k] = f^(k)(x0) / k!.
// Scalar may be double or XReal.

#include <array>
#include <cmath>
#include <limits>

#include "singtrace/xreal.hpp"

namespace singtrace {

template <class S, int N>
struct Jet {
    static_assert(N >= 1);
    std::array<S, N> c{};

    Jet() {
        for (auto& v : c) v = S(0.0);
    }
    Jet(double v) : Jet() { c[0] = S(v); }  // NOLINT
    Jet(const S& v, bool) : Jet() { c[0] = v; }

    static Jet variable(const S& x0) {
        Jet j(x0, true);
        if constexpr (N > 1) j.c[1] = S(1.0);
        return j;
    }

    const S& value() const { return c[0]; }

    // k-th derivative at the expansion point
    S derivative(int k) const {
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return c[k] * S(f);
    }

    Jet operator-() const {
        Jet r;
        for (int k = 0; k < N; ++k) r.c[k] = -c[k];
        return r;
    }
    Jet& operator+=(const Jet& o) {
        for (int k = 0; k < N; ++k) c[k] = c[k] + o.c[k];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        for (int k = 0; k < N; ++k) c[k] = c[k] - o.c[k];
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(const Jet& a, const Jet& b) {
        Jet r;
        for (int k = 0; k < N; ++k) {
            S acc(0.0);
            for (int j = 0; j <= k; ++j) acc = acc + a.c[j] * b.c[k - j];
            r.c[k] = acc;
        }
        return r;
    }
    friend Jet operator/(const Jet& a, const Jet& b) {
        Jet q;
        for (int k = 0; k < N; ++k) {
            S acc = a.c[k];
            for (int j = 0; j < k; ++j) acc = acc - q.c[j] * b.c[k - j];
            q.c[k] = acc / b.c[0];
        }
        return q;
    }
};

template <class S, int N>
Jet<S, N> exp(const Jet<S, N>& a) {
    using std::exp;
    Jet<S, N> e;
    e.c[0] = exp(a.c[0]);
    for (int k = 1; k < N; ++k) {
        S acc(0.0);
        for (int j = 1; j <= k; ++j) acc = acc + S(double(j)) * a.c[j] * e.c[k - j];
        e.c[k] = acc / S(double(k));
    }
    return e;
}

template <class S, int N>
Jet<S, N> log(const Jet<S, N>& a) {
    using std::log;
    Jet<S, N> l;
    if (a.c[0] < S(0.0)) {
        l.c[0] = S(std::numeric_limits<double>::quiet_NaN());
        return l;
    }
    l.c[0] = log(a.c[0]);
    for (int k = 1; k < N; ++k) {
        S acc = a.c[k];
        for (int j = 1; j < k; ++j) acc = acc - S(double(j) / k) * l.c[j] * a.c[k - j];
        l.c[k] = acc / a.c[0];
    }
    return l;
}

template <class S, int N>
void sincos(const Jet<S, N>& a, Jet<S, N>& s, Jet<S, N>& co) {
    using std::cos;
    using std::sin;
    s.c[0] = sin(a.c[0]);
    co.c[0] = cos(a.c[0]);
    for (int k = 1; k < N; ++k) {
        S as(0.0), ac(0.0);
        for (int j = 1; j <= k; ++j) {
            as = as + S(double(j)) * a.c[j] * co.c[k - j];
            ac = ac + S(double(j)) * a.c[j] * s.c[k - j];
        }
        s.c[k] = as / S(double(k));
        co.c[k] = -ac / S(double(k));
    }
}

template <class S, int N>
Jet<S, N> sin(const Jet<S, N>& a) {
    Jet<S, N> s, c;
    sincos(a, s, c);
    return s;
}

template <class S, int N>
Jet<S, N> cos(const Jet<S, N>& a) {
    Jet<S, N> s, c;
    sincos(a, s, c);
    return c;
}

// a^y for constant y; integer y allows a negative base
template <class S, int N>
Jet<S, N> pow(const Jet<S, N>& a, double y) {
    using std::pow;
    Jet<S, N> p;
    bool integral = y == std::floor(y) && std::fabs(y) <= 64;
    if (!integral && a.c[0] < S(0.0)) {
        p.c[0] = S(std::numeric_limits<double>::quiet_NaN());
        return p;
    }
    if (a.c[0] == S(0.0)) {
        if (integral && y >= 0) {
            Jet<S, N> r(1.0);
            for (int i = 0; i < static_cast<int>(y); ++i) r = r * a;
            return r;
        }
        p.c[0] = S(std::numeric_limits<double>::quiet_NaN());
        return p;
    }
    // p' a = y p a'  ->  coefficient recurrence
    p.c[0] = pow(a.c[0], y);
    for (int k = 1; k < N; ++k) {
        S acc(0.0);
        for (int j = 1; j <= k; ++j) acc = acc + S(y * j - (k - j)) * a.c[j] * p.c[k - j];
        p.c[k] = acc / (S(double(k)) * a.c[0]);
    }
    return p;
}

template <class S, int N>
Jet<S, N> sqrt(const Jet<S, N>& a) {
    return pow(a, 0.5);
}

template <class S, int N>
Jet<S, N> abs(const Jet<S, N>& a) {
    return a.c[0] < S(0.0) ? -a : a;
}

template <class S, int N>
double to_double(const Jet<S, N>& a) {
    return to_double(a.c[0]);
}

}  // namespace singtrace
