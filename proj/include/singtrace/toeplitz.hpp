#pragma once

// Index of Toeplitz operators T_u = P u P on the circle s in [0, 1), and the
// trace identity Tr(a f(D)) = a int f on a frequency grid.

#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "singtrace/expr.hpp"
#include "singtrace/spectral_flow.hpp"

namespace singtrace {

using cplx = std::complex<double>;

class Symbol {
public:
    // u(s) = sum_k c_k e^(2 pi i k s)
    static Symbol fourier(const std::map<int, cplx>& coeffs);
    static Symbol exponential(int n);
    // u(s) = re(s) + i im(s)
    static Symbol expression(const Expression& re, const Expression& im);

    // pointwise u / |u|; the winding number is unchanged
    Symbol unitarized() const;
    Symbol conj() const;
    friend Symbol operator*(const Symbol& a, const Symbol& b);

    cplx operator()(double s) const;
    bool trig_polynomial() const;
    // exact for trigonometric polynomials, from 2^14 samples otherwise
    std::map<int, cplx> coefficients(int max_abs_k) const;
    // u at s = j/n and u' there (exact or spectral)
    std::vector<cplx> samples(int n) const;
    std::vector<cplx> derivative_samples(int n) const;
    const std::string& describe() const;

    struct Impl;

private:
    explicit Symbol(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

constexpr int kCircleSamples = 4096;

// min |u| below eps0 * max |u| on the samples is rejected
int winding_number(const Symbol& u, double eps0 = 1e-8);

// (1/2 pi i) int_0^1 u (u*)' ds by the trapezoid rule; requires |u| = 1
double trace_formula_index(const Symbol& u);

struct NearKernel {
    int count = 0;      // singular values < eps of the N x N truncation
    int count_2N = 0;
    int sign_hint = 0;  // -winding
    double smallest_regular = 0.0;  // smallest singular value >= eps at N
};

// throws Inconclusive when the counts at N and 2N differ
NearKernel truncated_near_kernel(const Symbol& u, int N, double eps = 1e-6);

// constant diagonal of u[D,u*] in the Fourier model, -sum_j j |c_j|^2
double commutator_diagonal(const Symbol& u);
ZetaFlow zeta_index(const Symbol& u, double tol);

struct GridHalfLine {
    double h = 1e-3;
    double lambda = 40.0;
};

// |f(t)| <= C e^(-t^2/2), or C (1 + t^2)^(-q/2)
struct Decay {
    enum class Kind { gaussian, algebraic } kind = Kind::gaussian;
    double C = 1.0;
    double q = 0.0;
};

struct CrossedTrace {
    double lhs = 0.0;  // h sum_k a f(xi_k)
    double rhs = 0.0;  // a int_R f
    double rel_err = 0.0;
    double tail_bound = 0.0;
};

// rejects grids whose declared tail mass beyond lambda exceeds coverage_tol
CrossedTrace crossed_trace_check(double a, const std::function<double(double)>& f, const GridHalfLine& grid,
                                 const Decay& decay, double coverage_tol = 1e-8);

}  // namespace singtrace
