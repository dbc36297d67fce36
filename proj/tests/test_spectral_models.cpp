#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <random>

#include "singtrace/errors.hpp"
#include "singtrace/spectral_models.hpp"

using namespace singtrace;

namespace {

SpectralModel harmonic_diag() { return SpectralModel::diagonal(Expression::parse("1/(n+1)"), {1, 1, 0}); }
SpectralModel harmonic_closed() { return SpectralModel::closed_form(Expression::parse("1/(1+s)"), {1, 1, 0}); }

}  // namespace

TEST_CASE("mu_at") {
    Eigen::MatrixXd d = Eigen::Vector3d(3, 1, 2).asDiagonal();
    auto m = SpectralModel::matrix(d);
    CHECK(mu_at(m, 1.5) == doctest::Approx(2.0));
    CHECK(mu_at(m, 0.0) == doctest::Approx(3.0));
    CHECK(mu_at(m, 7.0) == 0.0);
    CHECK(mu_at(harmonic_closed(), 9.0) == doctest::Approx(0.1));
    auto sq = SpectralModel::diagonal(Expression::parse("(n+1)^(-1/2)"), {1, 0.5, 0});
    CHECK(mu_at(sq, 3.2) == doctest::Approx(0.5));
    CHECK_THROWS_AS(mu_at(sq, -1.0), DomainError);
}

TEST_CASE("model construction rejects broken contracts") {
    // tail law claims faster decay than the sequence has
    CHECK_THROWS_AS(SpectralModel::diagonal(Expression::parse("1/(n+1)"), {1, 2, 0}), InvalidInput);
    CHECK_THROWS_AS(SpectralModel::diagonal(Expression::parse("1/(n+1)"), {0, 0, 0}), InvalidInput);
    // increasing singular values
    CHECK_THROWS_AS(SpectralModel::closed_form(Expression::parse("s/(1+s)"), {1, 1, 0}), InvalidInput);
}

TEST_CASE("integral_mu") {
    CHECK(integral_mu(harmonic_closed(), std::exp(1.0) - 1) == doctest::Approx(1.0).epsilon(1e-12));
    auto F = SpectralModel::integrated(Expression::parse("log(1+s)"), {1, 1, 0});
    CHECK(integral_mu(F, 1e300) == doctest::Approx(300 * std::log(10.0)).epsilon(1e-12));
    // the same with quadrature over the closed-form mu
    CHECK(integral_mu(harmonic_closed(), 1e300) == doctest::Approx(300 * std::log(10.0)).epsilon(1e-11));
    Eigen::MatrixXd d = Eigen::Vector3d(3, 2, 1).asDiagonal();
    CHECK(integral_mu(SpectralModel::matrix(d), 10.0) == doctest::Approx(6.0));
    // diagonal partial sums beyond the table against brute force
    auto h = harmonic_diag();
    double brute = 0;
    for (int n = 0; n < 1000000; ++n) brute += 1.0 / (n + 1.0);
    CHECK(integral_mu(h, 1e6) == doctest::Approx(brute).epsilon(1e-12));
    CHECK(integral_mu(h, 1000.5) == doctest::Approx([] {
              double s = 0;
              for (int n = 0; n < 1000; ++n) s += 1.0 / (n + 1.0);
              return s + 0.5 / 1001.0;
          }()));
}

TEST_CASE("distribution_at and the Galois relation") {
    auto h = harmonic_diag();
    CHECK(distribution_at(h, 0.3) == 3.0);
    CHECK(distribution_at(h, 2.0) == 0.0);
    CHECK(distribution_at(harmonic_closed(), 1e-6) == doctest::Approx(1e6 - 1).epsilon(1e-12));
    CHECK(distribution_at(h, 1e-7) == doctest::Approx(1e7 - 1).epsilon(1e-12));
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-8, 0);
    for (const auto& m : {h, harmonic_closed()}) {
        for (int i = 0; i < 50; ++i) {
            double u = std::pow(10.0, U(rng));
            double lam = distribution_at(m, u);
            for (double s : {lam, lam * 1.5 + 1, lam * 2 + 3}) CHECK(mu_at(m, s) <= u);
            if (lam > 0)
                for (double s : {0.0, lam * 0.5, std::max(0.0, std::nextafter(lam, 0.0) - 1e-9 * lam)})
                    CHECK(mu_at(m, s) > u);
        }
    }
}

TEST_CASE("cutoff_trace agrees with direct sums") {
    auto h = harmonic_diag();
    CHECK(cutoff_trace(h, 0.3) == doctest::Approx(1 + 0.5 + 1.0 / 3));
    CHECK(cutoff_trace(h, 5.0) == 0.0);
    auto c = harmonic_closed();
    CHECK(cutoff_trace(c, 1.0 / 1e5) == doctest::Approx(std::log(1e5)).epsilon(1e-11));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-4.5, 0);
    for (int i = 0; i < 50; ++i) {
        double u = std::pow(10.0, U(rng));
        double direct = 0;
        for (int n = 0; 1.0 / (n + 1.0) > u; ++n) direct += 1.0 / (n + 1.0);
        CHECK(cutoff_trace(h, u) == doctest::Approx(direct).epsilon(1e-9));
    }
    auto osc = SpectralModel::integrated(Expression::parse("log(1+s)*(1+0.4*sin(log(log(s+e))))"), {1.6, 1, 0});
    for (double u : {0.5, 1e-3, 1e-6}) CHECK(cutoff_trace(osc, u) > 0);
}

TEST_CASE("ideal_norm") {
    auto g = log_grid(1e-3, 1e12, 8);
    auto ip = ideal_norm(harmonic_closed(), IdealParams{}, g);
    CHECK(ip.norm_estimate == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ip.in_ideal);
    CHECK(ip.small_ideal_C == doctest::Approx(1.0).epsilon(1e-9));
    auto sq = SpectralModel::closed_form(Expression::parse("(1+s)^(-1/2)"), {1, 0.5, 0});
    IdealParams p2;
    p2.p = 2;
    auto r2 = ideal_norm(sq, p2, g);
    CHECK(r2.in_ideal);
    CHECK(r2.norm_estimate < 2.0 + 1e-9);
    CHECK_FALSE(ideal_norm(sq, IdealParams{}, g).in_ideal);
    Eigen::MatrixXd d = Eigen::Vector3d(3, 2, 1).asDiagonal();
    auto fr = ideal_norm(SpectralModel::matrix(d), IdealParams{}, g);
    CHECK(fr.in_ideal);
    CHECK(fr.argmax_t < 10);
    CHECK_THROWS_AS(ideal_norm(harmonic_closed(), IdealParams{}, log_grid(1, 1e6, 4)), InvalidInput);
}

TEST_CASE("zeta") {
    auto h = harmonic_diag();
    CHECK(zeta(h, 2.0) == doctest::Approx(boost::math::zeta(2.0)).epsilon(1e-13));
    for (double s : {1.001, 1.1, 1.5, 3.0})
        CHECK(zeta(h, s) == doctest::Approx(boost::math::zeta(s)).epsilon(1e-12));
    auto w = SpectralModel::diagonal(Expression::parse("1/(n+1)"), {1, 1, 0}, Expression::parse("2"));
    CHECK(zeta_weighted(w, 2.0) == doctest::Approx(2 * boost::math::zeta(2.0)).epsilon(1e-13));
    Eigen::MatrixXd d = Eigen::Vector3d(3, 2, 1).asDiagonal();
    CHECK(zeta(SpectralModel::matrix(d), 1.0) == doctest::Approx(6.0));
    CHECK_THROWS_AS(zeta(h, 1.0), DivergenceError);
    try {
        zeta(h, 0.9);
    } catch (const DivergenceError& e) {
        CHECK(e.abscissa() == 1.0);
    }
    // closed form: int_0^inf (1+t)^-s dt = 1/(s-1)
    CHECK(zeta(harmonic_closed(), 1.25) == doctest::Approx(4.0).epsilon(1e-11));
    // two independent cutoffs
    ZetaOptions big;
    big.direct_terms = 1000000;
    for (double s : {1.01, 2.0}) CHECK(zeta(h, s, big) == doctest::Approx(zeta(h, s)).epsilon(1e-10));
    // oscillating weight, compared with a long brute-force sum plus integral tail
    auto wb = SpectralModel::diagonal(Expression::parse("1/(n+1)"), {1, 1, 0}, Expression::parse("2+sin(n)"));
    double brute = 0;
    for (int n = 0; n < 4000000; ++n) brute += (2 + std::sin(n)) * std::pow(n + 1.0, -2.0);
    brute += 2.0 / 4000000.0;
    CHECK(zeta_weighted(wb, 2.0) == doctest::Approx(brute).epsilon(1e-9));
}

TEST_CASE("heat_trace") {
    auto h = harmonic_diag();
    double direct = 0;
    for (int k = 1; k < 1000; ++k) direct += std::exp(-k * k / 100.0);
    CHECK(heat_trace(h, 10.0, 1.0) == doctest::Approx(direct).epsilon(1e-13));
    CHECK(heat_trace(h, 10.0, 1.0) == doctest::Approx(std::sqrt(M_PI) * 10 / 2 - 0.5).epsilon(1e-12));
    auto sq = SpectralModel::diagonal(Expression::parse("(n+1)^(-1/2)"), {1, 0.5, 0});
    CHECK(heat_trace(sq, 100.0, 2.0) == doctest::Approx(1.0 / std::expm1(0.01)).epsilon(1e-12));
    // deep in the tail: theta function identity still holds
    double lam = std::pow(2.0, 20);
    CHECK(heat_trace(h, lam, 1.0) == doctest::Approx(std::sqrt(M_PI) * lam / 2 - 0.5).epsilon(1e-12));
    CHECK(heat_trace(sq, lam, 2.0) == doctest::Approx(1.0 / std::expm1(1.0 / lam)).epsilon(1e-11));
    Eigen::MatrixXd d = Eigen::Vector3d(3, 2, 1).asDiagonal();
    CHECK(heat_trace(SpectralModel::matrix(d), 1e-3, 1.0) == 0.0);
    // continuous harmonic: int_0^inf exp(-(1+t)^2/lam^2) dt
    double c = heat_trace(harmonic_closed(), 50.0, 1.0);
    CHECK(c == doctest::Approx(50 * std::sqrt(M_PI) / 2 * std::erfc(1.0 / 50)).epsilon(1e-11));
}

TEST_CASE("submajorization") {
    auto a = harmonic_closed();
    auto b = SpectralModel::closed_form(Expression::parse("2/(1+s)"), {2, 1, 0});
    auto g = log_grid(1e-2, 1e8, 4);
    CHECK(submajorizes(a, b, g).holds);
    CHECK(submajorizes(a, a, g).holds);
    Eigen::MatrixXd x = Eigen::Vector3d(3, 2, 1).asDiagonal();
    Eigen::MatrixXd y = Eigen::Vector3d(2, 2, 2).asDiagonal();
    auto X = SpectralModel::matrix(x), Y = SpectralModel::matrix(y);
    std::vector<double> pts{1, 2, 3};
    auto r = submajorizes(X, Y, pts);
    CHECK_FALSE(r.holds);
    CHECK(r.max_violation == doctest::Approx(1.0));
    CHECK(submajorizes(Y, X, pts).holds);
}

TEST_CASE("lemma 2.1 and 2.3 checks") {
    auto g = log_grid(1e-2, 1e8, 4);
    auto r = ideal_bound_check(harmonic_closed(), {1.0, 1.5, 2.0, 3.0}, g);
    CHECK(r.K == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.worst_ratio == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.holds);
    auto h = harmonic_diag();
    auto rh = ideal_bound_check(h, {2.0}, {100.0});
    CHECK(rh.K == doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-6));
    double lhs = 0;
    for (int n = 0; n < 100; ++n) lhs += 1.0 / ((n + 1.0) * (n + 1.0));
    CHECK(rh.worst_ratio == doctest::Approx(lhs / (rh.K * rh.K * (1 - 1.0 / 101))));
    CHECK(rh.worst_ratio <= 1.0);
    Eigen::MatrixXd d = Eigen::Vector3d(3, 2, 1).asDiagonal();
    auto fr = ideal_bound_check(SpectralModel::matrix(d), {1.5}, {1e3, 1e6}, 3.0);
    CHECK(fr.worst_ratio < 1.0);

    auto tg = log_grid(2, 1e12, 4);
    auto l23 = distribution_bound_check(harmonic_closed(), 1.1, tg);
    CHECK(l23.holds);
    CHECK(l23.from_t == doctest::Approx(2.0));
    auto fr23 = distribution_bound_check(SpectralModel::matrix(d), 1.0, tg);
    CHECK(fr23.holds);
    auto ll = SpectralModel::diagonal(Expression::parse("1/((n+1)*log(n+2))"), {1.5, 1, 0});
    auto ip = ideal_norm(ll, IdealParams{}, log_grid(1e-3, 1e12, 8));
    auto l = distribution_bound_check(ll, 1.1 * ip.norm_estimate, tg);
    CHECK(l.holds);
    CHECK_FALSE(distribution_bound_check(harmonic_closed(), 0.01, log_grid(2, 1e3, 4)).holds);
}

TEST_CASE("power models and monotonicity on grids") {
    auto h = harmonic_closed();
    auto h2 = h.power(2.0);
    CHECK(mu_at(h2, 3.0) == doctest::Approx(1.0 / 16));
    CHECK(integral_mu(h2, 1e9) == doctest::Approx(1.0 - 1.0 / (1 + 1e9)).epsilon(1e-11));
    CHECK(h2.abscissa() == doctest::Approx(0.5));
    for (const auto& m : {harmonic_diag(), h}) {
        auto g = log_grid(1e-2, 1e10, 6);
        double prev_mu = 1e300, prev_F = -1;
        for (std::size_t i = 0; i < g.size(); ++i) {
            double mu = mu_at(m, g[i]), F = integral_mu(m, g[i]);
            CHECK(mu <= prev_mu);
            CHECK(F >= prev_F);
            if (i > 0) {
                double mid = 0.5 * (g[i] + g[i - 1]);
                CHECK(integral_mu(m, mid) >= 0.5 * (F + prev_F) - 1e-12);
                if (m.kind() == ModelKind::closed_form_mu) {
                    double dt = g[i] - g[i - 1];
                    CHECK(F - prev_F >= dt * mu * (1 - 1e-10));
                    CHECK(F - prev_F <= dt * prev_mu * (1 + 1e-10));
                }
            }
            prev_mu = mu;
            prev_F = F;
        }
    }
}
