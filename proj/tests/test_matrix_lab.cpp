#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "singtrace/errors.hpp"
#include "singtrace/matrix_lab.hpp"

using namespace singtrace;

namespace {

double zeta_near_one(double e) {
    const double g0 = 0.57721566490153286, g1 = -0.072815845483676725, g2 = -0.0096903631928723185;
    return 1 / e + g0 - g1 * e + 0.5 * g2 * e * e;
}

Eigen::MatrixXd diag(std::initializer_list<double> v) {
    Eigen::VectorXd d(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) d(i++) = x;
    return d.asDiagonal();
}

SpectralModel harmonic() { return SpectralModel::diagonal(Expression::parse("1/(n+1)"), {1, 1, 0}); }

// (s-1) sum_n w(n) (n+1)^-s by direct summation to N, then the block mean of w
// times an Euler-Maclaurin tail of (n+1)^-s
template <class W>
double brute_weighted(W w, double s, long N) {
    double head = 0;
    for (long n = N - 1; n >= 0; --n) head += w(static_cast<double>(n)) * std::pow(n + 1.0, -s);
    double mean = 0;
    for (long n = N / 2; n < N; ++n) mean += w(static_cast<double>(n));
    mean /= static_cast<double>(N - N / 2);
    double a = N + 1.0;
    double tail = std::pow(a, 1 - s) / (s - 1) + 0.5 * std::pow(a, -s) + s / 12 * std::pow(a, -s - 1);
    return (s - 1) * (head + mean * tail);
}

}  // namespace

TEST_CASE("psd_power") {
    Eigen::MatrixXd A(2, 2);
    A << 2, 1, 1, 2;
    Eigen::MatrixXd R = psd_power(A, 0.5);
    CHECK((R * R - A).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((psd_power(A, 2.0) - A * A).cwiseAbs().maxCoeff() <= 1e-13);
    Eigen::MatrixXd N(2, 2);
    N << 1, 0, 0, -1;
    CHECK_THROWS_AS(psd_power(N, 1.5), DomainError);
}

TEST_CASE("pair validation") {
    Eigen::MatrixXd ns(2, 2);
    ns << 1, 2, 0, 1;
    CHECK_THROWS_AS(MatrixPair::make(ns, diag({1, 1}), 1.5), InvalidInput);
    CHECK_THROWS_AS(MatrixPair::make(diag({1, -1}), diag({1, 1}), 1.5), InvalidInput);
    CHECK_THROWS_AS(MatrixPair::make(diag({1, 1}), diag({1, 0}), 1.5), InvalidInput);
    CHECK_THROWS_AS(MatrixPair::make(diag({1, 1}), diag({1, 1}), 0.5), InvalidInput);
    // tiny negative eigenvalue is clamped
    auto p = MatrixPair::make(diag({1, -1e-14}), diag({1, 3}), 1.5);
    CHECK(p.T(1, 1) == 0.0);
    CHECK(p.m == 1.0);
    CHECK(p.M == 3.0);
    CHECK_THROWS_AS(loewner_upper(MatrixPair::make(diag({1, 1}), diag({1, 2}), 2.0)), InvalidInput);
}

TEST_CASE("loewner examples") {
    auto id = MatrixPair::make(diag({2, 3, 5}), diag({1, 1, 1}), 1.5);
    auto u = loewner_upper(id);
    CHECK(u.psd);
    CHECK(std::fabs(u.min_eig) <= 1e-13 * u.scale);

    // commuting diagonals: scalar inequality per eigenvalue
    auto p = MatrixPair::make(diag({2, 3}), diag({1, 4}), 1.5);
    double M = 4, m = 1, s = 1.5;
    double up0 = std::pow(M, s - 1) * 1 * std::pow(2, s) - std::pow(2, s);
    double up1 = std::pow(M, s - 1) * 4 * std::pow(3, s) - std::pow(12, s);
    double lo0 = std::pow(2, s) - std::pow(m, s - 1) * std::pow(2, s);
    double lo1 = std::pow(12, s) - std::pow(m, s - 1) * 4 * std::pow(3, s);
    u = loewner_upper(p);
    auto l = loewner_lower(p);
    CHECK(u.psd);
    CHECK(l.psd);
    CHECK(u.min_eig == doctest::Approx(std::min(up0, up1)).epsilon(1e-12).scale(u.scale));
    CHECK(l.min_eig == doctest::Approx(std::min(lo0, lo1)).epsilon(1e-12).scale(l.scale));
    CHECK(u.scale == doctest::Approx(std::pow(3, s) * std::pow(4, s)));

    // scalar b: both sides equal
    Eigen::MatrixXd T(2, 2);
    T << 2, 1, 1, 3;
    auto two = MatrixPair::make(T, diag({2, 2}), 1.5);
    CHECK(std::fabs(loewner_upper(two).min_eig) <= 1e-13 * loewner_upper(two).scale);
    CHECK(std::fabs(loewner_lower(two).min_eig) <= 1e-13 * loewner_lower(two).scale);
}

TEST_CASE("continuity at s = 1") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto p = random_pair(seed, 8, 1 + 1e-6);
        auto u = loewner_upper(p);
        auto l = loewner_lower(p);
        CHECK(std::fabs(u.min_eig) <= 1e-6 * u.scale);
        CHECK(std::fabs(l.min_eig) <= 1e-6 * l.scale);
    }
}

TEST_CASE("singular value inequalities") {
    auto id = singular_ineq_p(MatrixPair::make(diag({2, 3, 5}), diag({1, 1, 1}), 2.5));
    CHECK(id.holds);
    CHECK(id.worst_upper <= 1e-14);
    CHECK(id.worst_lower <= 1e-14);
    auto d = singular_ineq_p(MatrixPair::make(diag({2, 3}), diag({1, 4}), 3.0));
    CHECK(d.holds);
    CHECK(d.trace_holds);
}

TEST_CASE("randomized suites") {
    TrialOptions o;
    o.seed = 77;
    o.trials = 200;
    auto a = run_trials(o);
    CHECK(a.violations == 0);
    CHECK(a.checks == 200 * 3 * 2);
    CHECK(a.worst_ratio >= -1e-9);
    auto b = run_trials(o);
    CHECK(a.worst_ratio == b.worst_ratio);

    o.check = TrialCheck::singular;
    o.exponents = {1.0, 2.5, 4.0};
    auto c = run_trials(o);
    CHECK(c.violations == 0);
    CHECK(c.checks == 200 * 3);
}

TEST_CASE("compression residue") {
    auto h = harmonic();
    auto one = compression_residue_compare(Expression::parse("1+0*n"), h, default_s_grid());
    for (double g : one.gap) CHECK(g == 0.0);

    double s = 1.01;
    auto two = compression_residue_compare(Expression::parse("2+0*n"), h, {1.01, 1.02, 1.04, 1.08});
    double z = zeta_near_one(s - 1);
    // the truncated Laurent series is good to about 3e-12 here
    CHECK(two.lhs[0] == doctest::Approx((s - 1) * 2 * z).epsilon(1e-11));
    CHECK(two.rhs[0] == doctest::Approx((s - 1) * std::pow(2, s) * z).epsilon(1e-11));
    CHECK(two.gap[0] == doctest::Approx((s - 1) * (2 - std::pow(2, s)) * z).epsilon(1e-10));

    auto b = Expression::parse("2+sin(n)");
    auto r = compression_residue_compare(b, h, default_s_grid());
    for (std::size_t i = 0; i < 2; ++i) {
        double si = r.s_grid[i];
        double ref = brute_weighted(
            [&](double n) {
                double bn = 2 + std::sin(n);
                return bn - std::pow(bn, si);
            },
            si, 4000000);
        CHECK(r.gap[i] == doctest::Approx(ref).epsilon(1e-7));
    }
    for (std::size_t i = 1; i < r.gap.size(); ++i) CHECK(std::fabs(r.gap[i]) < std::fabs(r.gap[i - 1]));
    REQUIRE(r.band.converged);
    CHECK(std::fabs(*r.band.value) <= 1e-3);

    CHECK_THROWS_AS(compression_residue_compare(b, SpectralModel::closed_form(Expression::parse("1/(1+t)"), {1, 1, 0}),
                                                default_s_grid()),
                    InvalidInput);
    CHECK_THROWS_AS(compression_residue_compare(Expression::parse("sin(n)"), h, default_s_grid()), InvalidInput);
}

TEST_CASE("eps perturbation") {
    auto r = epsilon_perturbation(Expression::parse("2+sin(n)"), harmonic());
    REQUIRE(r.gap.size() == 5);
    // the residue of the b + eps run exceeds that of b by eps times the mean of 1
    for (std::size_t i = 0; i < r.eps.size(); ++i) CHECK(r.gap[i] == doctest::Approx(-r.eps[i]).epsilon(1e-3));
    CHECK(r.exponent >= 0.25);
    CHECK(r.r2 >= 0.9);
    CHECK(r.holds);
}
