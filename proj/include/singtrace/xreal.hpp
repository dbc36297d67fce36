#pragma once

// Extended-range real: double mantissa with a 64-bit binary exponent.
// Used where singular-value models are evaluated at t = e^u with u far
// beyond the double range (u up to ~1e15).

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>

namespace singtrace {

class XReal {
public:
    XReal() = default;
    XReal(double v) : m_(v), e_(0) { normalize(); }  // NOLINT: implicit by design

    static XReal from_parts(double m, std::int64_t e) {
        XReal r;
        r.m_ = m;
        r.e_ = e;
        r.normalize();
        return r;
    }

    // e^x for double x, exact exponent split.
    static XReal exp_of(double x) {
        if (std::isnan(x)) return XReal(x);
        if (x == std::numeric_limits<double>::infinity()) return XReal(x);
        if (x == -std::numeric_limits<double>::infinity()) return XReal();
        constexpr double ln2 = 0.69314718055994530942;
        double k = std::floor(x / ln2);
        // two-term ln2 split keeps the reduced argument accurate for large |x|
        constexpr double ln2_hi = 0.693147180369123816490;
        constexpr double ln2_lo = 1.90821492927058770002e-10;
        double r = std::fma(-k, ln2_hi, x) - k * ln2_lo;
        return from_parts(std::exp(r), static_cast<std::int64_t>(k));
    }

    double mantissa() const { return m_; }
    std::int64_t exponent() const { return e_; }
    bool is_zero() const { return m_ == 0.0; }
    bool is_finite() const { return std::isfinite(m_); }
    int sign() const { return (m_ > 0) - (m_ < 0); }

    double to_double() const {
        if (m_ == 0.0 || !std::isfinite(m_)) return m_;
        if (e_ > 2100) return m_ > 0 ? std::numeric_limits<double>::infinity()
                                     : -std::numeric_limits<double>::infinity();
        if (e_ < -2100) return 0.0;
        return std::ldexp(m_, static_cast<int>(e_));
    }
    explicit operator double() const { return to_double(); }

    // ln|x|
    double log_abs() const {
        constexpr double ln2 = 0.69314718055994530942;
        return std::log(std::fabs(m_)) + static_cast<double>(e_) * ln2;
    }

    XReal operator-() const { return from_parts(-m_, e_); }

    XReal& operator+=(const XReal& o) { return *this = *this + o; }
    XReal& operator-=(const XReal& o) { return *this = *this - o; }
    XReal& operator*=(const XReal& o) { return *this = *this * o; }
    XReal& operator/=(const XReal& o) { return *this = *this / o; }

    friend XReal operator+(const XReal& a, const XReal& b) {
        if (a.m_ == 0.0) return b;
        if (b.m_ == 0.0) return a;
        if (!a.is_finite() || !b.is_finite()) return XReal(a.m_ + b.m_);
        const XReal& big = a.e_ >= b.e_ ? a : b;
        const XReal& small = a.e_ >= b.e_ ? b : a;
        std::int64_t d = big.e_ - small.e_;
        if (d > 64) return big;
        return from_parts(big.m_ + std::ldexp(small.m_, -static_cast<int>(d)), big.e_);
    }
    friend XReal operator-(const XReal& a, const XReal& b) { return a + (-b); }
    friend XReal operator*(const XReal& a, const XReal& b) {
        return from_parts(a.m_ * b.m_, a.e_ + b.e_);
    }
    friend XReal operator/(const XReal& a, const XReal& b) {
        if (b.m_ == 0.0) return XReal(a.m_ / b.m_);
        return from_parts(a.m_ / b.m_, a.e_ - b.e_);
    }

    friend bool operator<(const XReal& a, const XReal& b) { return compare(a, b) < 0; }
    friend bool operator>(const XReal& a, const XReal& b) { return compare(a, b) > 0; }
    friend bool operator<=(const XReal& a, const XReal& b) { return compare(a, b) <= 0; }
    friend bool operator>=(const XReal& a, const XReal& b) { return compare(a, b) >= 0; }
    friend bool operator==(const XReal& a, const XReal& b) { return compare(a, b) == 0; }
    friend bool operator!=(const XReal& a, const XReal& b) { return compare(a, b) != 0; }

    friend std::ostream& operator<<(std::ostream& os, const XReal& x) {
        if (x.e_ > -1000 && x.e_ < 1000) return os << x.to_double();
        constexpr double log10_2 = 0.30102999566398119521;
        double l = std::log10(std::fabs(x.m_)) + static_cast<double>(x.e_) * log10_2;
        double ip = std::floor(l);
        return os << (x.m_ < 0 ? "-" : "") << std::pow(10.0, l - ip) << "e" << static_cast<long long>(ip);
    }

private:
    static int compare(const XReal& a, const XReal& b) {
        int sa = a.sign(), sb = b.sign();
        if (sa != sb) return sa < sb ? -1 : 1;
        if (sa == 0) return 0;
        int mag;
        if (a.e_ != b.e_) mag = a.e_ < b.e_ ? -1 : 1;
        else mag = std::fabs(a.m_) < std::fabs(b.m_) ? -1 : (std::fabs(a.m_) > std::fabs(b.m_) ? 1 : 0);
        return sa > 0 ? mag : -mag;
    }

    void normalize() {
        if (m_ == 0.0 || !std::isfinite(m_)) {
            if (m_ == 0.0) m_ = 0.0;
            e_ = 0;
            return;
        }
        int k = 0;
        m_ = std::frexp(m_, &k);
        e_ += k;
    }

    double m_ = 0.0;
    std::int64_t e_ = 0;
};

inline XReal exp(const XReal& x) {
    if (x.exponent() > 62) {
        // |x| > 2^62: result is 0 or overflows any useful range
        if (x.sign() < 0) return XReal();
        return XReal(std::numeric_limits<double>::infinity());
    }
    return XReal::exp_of(x.to_double());
}

inline XReal log(const XReal& x) {
    if (x.sign() < 0) return XReal(std::numeric_limits<double>::quiet_NaN());
    if (x.is_zero()) return XReal(-std::numeric_limits<double>::infinity());
    return XReal(x.log_abs());
}

inline XReal sqrt(const XReal& x) {
    if (x.sign() < 0) return XReal(std::numeric_limits<double>::quiet_NaN());
    std::int64_t e = x.exponent();
    double m = x.mantissa();
    if (e % 2 != 0) {
        m *= 2.0;
        e -= 1;
    }
    return XReal::from_parts(std::sqrt(m), e / 2);
}

inline XReal abs(const XReal& x) { return x.sign() < 0 ? -x : x; }

// Trig on extended reals only makes sense for moderate arguments.
inline XReal sin(const XReal& x) { return XReal(std::sin(x.to_double())); }
inline XReal cos(const XReal& x) { return XReal(std::cos(x.to_double())); }

inline XReal pow(const XReal& x, double y) {
    if (x.is_zero()) return y > 0 ? XReal() : XReal(std::pow(0.0, y));
    if (y == std::floor(y) && std::fabs(y) <= 64) {
        // integer power keeps signs and exactness
        XReal base = y < 0 ? XReal(1.0) / x : x;
        long long n = static_cast<long long>(std::fabs(y));
        XReal acc(1.0);
        while (n > 0) {
            if (n & 1) acc *= base;
            base *= base;
            n >>= 1;
        }
        return acc;
    }
    if (x.sign() < 0) return XReal(std::numeric_limits<double>::quiet_NaN());
    // split y*log2|x| into integer and fractional exponent parts
    double lm = std::log2(x.mantissa());
    double ex = static_cast<double>(x.exponent());
    double yi = y * ex;
    double yerr = std::fma(y, ex, -yi);
    double k = std::floor(yi);
    double frac = (yi - k) + yerr + y * lm;
    double kf = std::floor(frac);
    return XReal::from_parts(std::exp2(frac - kf), static_cast<std::int64_t>(k + kf));
}

inline XReal pow(const XReal& x, const XReal& y) { return pow(x, y.to_double()); }

inline double to_double(double x) { return x; }
inline double to_double(const XReal& x) { return x.to_double(); }

}  // namespace singtrace
