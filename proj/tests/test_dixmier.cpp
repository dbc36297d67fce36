#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <random>

#include "singtrace/dixmier.hpp"
#include "singtrace/errors.hpp"

using namespace singtrace;

namespace {

// zeta(1 + e) from its Laurent series with the first two Stieltjes constants
double zeta_near_one(double e) {
    const double g0 = 0.57721566490153286, g1 = -0.072815845483676725, g2 = -0.0096903631928723185;
    return 1 / e + g0 - g1 * e + 0.5 * g2 * e * e;
}

SpectralModel harmonic() { return SpectralModel::diagonal(Expression::parse("1/(n+1)"), {1, 1, 0}); }
SpectralModel sqrt_model() { return SpectralModel::diagonal(Expression::parse("(n+1)^(-1/2)"), {1, 0.5, 0}); }
SpectralModel trace_class() { return SpectralModel::diagonal(Expression::parse("(n+1)^(-2)"), {1, 2, 0}); }
SpectralModel oscillatory() {
    return SpectralModel::integrated(Expression::parse("log(1+s)*(1+0.4*sin(log(log(s+e))))"), {1.6, 1, 0});
}

}  // namespace

TEST_CASE("normalization constants") {
    CHECK(route_constant(Route::zeta, 1.0) == 1.0);
    CHECK(route_constant(Route::zeta, 2.0) == 2.0);
    CHECK(route_constant(Route::heat, 1.0) == doctest::Approx(std::sqrt(M_PI) / 2).epsilon(1e-15));
    CHECK(route_constant(Route::heat, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(route_constant(Route::heat, 3.0) == doctest::Approx(3.0 * std::sqrt(M_PI) / 4).epsilon(1e-15));
    CHECK(route_constant(Route::partial_sum, 2.0) == 1.0);
    CHECK_THROWS_AS(route_constant(Route::zeta, 0.5), InvalidInput);
    LimitBand b;
    b.converged = true;
    b.value = 2.0;
    b.liminf_est = 1.9;
    b.limsup_est = 2.1;
    b.band_width = 0.2;
    auto n = normalize(b, Route::zeta, 2.0);
    CHECK(*n.value == 1.0);
    CHECK(n.band_width == doctest::Approx(0.1));
    for (Route r : {Route::partial_sum, Route::cutoff, Route::stretched_cutoff, Route::zeta, Route::heat})
        CHECK(route_from_string(to_string(r)) == r);
    CHECK_THROWS_AS(route_from_string("abel"), InvalidInput);
}

TEST_CASE("partial-sum route") {
    auto b = route_partial_sum(SpectralModel::closed_form(Expression::parse("1/(1+s)"), {1, 1, 0}), 1e-6);
    REQUIRE(b.converged);
    CHECK(std::fabs(*b.value - 1.0) <= 1e-6);

    // raw ratio at t = 1e8 against a brute-force harmonic sum
    auto h = harmonic();
    double brute = 0;
    for (int n = 100000000; n >= 1; --n) brute += 1.0 / n;
    CHECK(integral_mu(h, 1e8) / std::log1p(1e8) == doctest::Approx(brute / std::log1p(1e8)).epsilon(1e-12));
    CHECK(brute / std::log1p(1e8) == doctest::Approx(1.031).epsilon(1e-3));
    auto hb = route_partial_sum(h, 5e-3);
    REQUIRE(hb.converged);
    CHECK(std::fabs(*hb.value - 1.0) <= 5e-3);

    auto tb = route_partial_sum(trace_class(), 1e-6);
    REQUIRE(tb.converged);
    CHECK(std::fabs(*tb.value) <= 1e-6);

    CHECK_THROWS_AS(route_partial_sum(sqrt_model(), 5e-3), NotInIdeal);
    auto sq = route_partial_sum(sqrt_model().power(2.0), 5e-3);
    CHECK(std::fabs(*sq.value - 1.0) <= 5e-3);
}

TEST_CASE("cutoff routes") {
    auto closed = SpectralModel::closed_form(Expression::parse("1/(1+s)"), {1, 1, 0});
    CHECK(cutoff_trace(closed, 1.0 / 1e5) == doctest::Approx(std::log(1e5)).epsilon(1e-10));
    auto cb = route_cutoff(closed, 1e-3);
    REQUIRE(cb.converged);
    CHECK(std::fabs(*cb.value - 1.0) <= 1e-3);

    auto h = harmonic();
    // stretched form at t = 1e6 against direct summation up to floor(5 t ln t)
    double t = 1e6, top = 5 * t * std::log(t);
    double brute = 0;
    for (long n = static_cast<long>(top); n >= 1; --n) brute += 1.0 / static_cast<double>(n);
    brute += (top - std::floor(top)) / (std::floor(top) + 1);
    CHECK(integral_mu(h, top) == doctest::Approx(brute).epsilon(1e-11));
    auto sb = route_cutoff(h, 5e-3, 5.0);
    REQUIRE(sb.converged);
    CHECK(std::fabs(*sb.value - 1.0) <= 5e-3);

    auto fin = route_cutoff(SpectralModel::finite_diagonal({3, 2, 1}), 1e-6);
    REQUIRE(fin.converged);
    CHECK(std::fabs(*fin.value) <= 1e-6);
    CHECK_THROWS_AS(route_cutoff(h, 1e-3, -1.0), InvalidInput);
}

TEST_CASE("stretch invariance") {
    for (auto m : {harmonic(), oscillatory()}) {
        auto base = route_cutoff(m, 5e-3);
        for (double C : {0.5, 1.0, 5.0}) CHECK(route_cutoff(m, 5e-3, C).overlaps(base, 5e-3));
    }
}

TEST_CASE("zeta route") {
    auto z = route_zeta(harmonic(), 1.0, 1e-6);
    REQUIRE(z.raw.converged);
    CHECK(std::fabs(*z.raw.value - 1.0) <= 1e-6);
    REQUIRE(z.r_grid.size() == 21);
    CHECK(z.samples[0] == doctest::Approx(boost::math::zeta(1 + 1 / 16.0) / 16).epsilon(1e-12));
    for (std::size_t i = 6; i < z.r_grid.size(); i += 2) {
        double e = 1 / z.r_grid[i];
        CHECK(z.samples[i] == doctest::Approx(e * zeta_near_one(e)).epsilon(1e-13));
    }

    auto z2 = route_zeta(sqrt_model(), 2.0, 1e-3);
    REQUIRE(z2.raw.converged);
    CHECK(std::fabs(*z2.raw.value - 2.0) <= 1e-3);
    CHECK(std::fabs(*z2.value.value - 1.0) <= 1e-3);
    // (s - 2) zeta_R(s/2)
    double s = 2 + 1 / z2.r_grid[3];
    CHECK(z2.samples[3] == doctest::Approx((s - 2) * boost::math::zeta(s / 2)).epsilon(1e-11));

    auto w3 = SpectralModel::diagonal(Expression::parse("1/(n+1)"), {1, 1, 0}, Expression::parse("3"));
    auto zw = route_zeta(w3, 1.0, 1e-5, true);
    REQUIRE(zw.raw.converged);
    CHECK(std::fabs(*zw.value.value - 3.0) <= 1e-5);

    CHECK_THROWS_AS(route_zeta(sqrt_model(), 1.0, 1e-3), DivergenceError);
    CHECK_THROWS_AS(route_zeta(harmonic(), 1.0, 1e-3, true), InvalidInput);
    auto zt = route_zeta(trace_class(), 1.0, 1e-6);
    CHECK(std::fabs(*zt.value.value) <= 1e-6);
}

TEST_CASE("zeta value is linear and positive in the weight") {
    auto make = [](const char* w) { return SpectralModel::diagonal(Expression::parse("1/(n+1)"), {1, 1, 0}, Expression::parse(w)); };
    auto a = route_zeta(make("3"), 1.0, 1e-4, true);
    auto b = route_zeta(make("2+sin(n)"), 1.0, 1e-4, true);
    auto ab = route_zeta(make("5+sin(n)"), 1.0, 1e-4, true);
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i] > 0);
        CHECK(b.samples[i] > 0);
        CHECK(ab.samples[i] == doctest::Approx(a.samples[i] + b.samples[i]).epsilon(1e-9));
    }
    REQUIRE(a.raw.converged);
    REQUIRE(b.raw.converged);
    REQUIRE(ab.raw.converged);
    CHECK(*ab.raw.value == doctest::Approx(*a.raw.value + *b.raw.value).epsilon(1e-9));
    // the mean of 2 + sin n is 2
    CHECK(*b.raw.value == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("trace property for diagonal T and banded A") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> N01;
    const int n = 120;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = std::max(0, i - 2); j <= std::min(n - 1, i + 2); ++j) A(i, j) = N01(rng);
    std::vector<double> mu(n);
    for (int i = 0; i < n; ++i) mu[i] = 1.0 / (i + 1.0);
    auto T = SpectralModel::finite_diagonal(mu);
    WeightFn w;
    w.at = [&](double k) { return A(static_cast<int>(k), static_cast<int>(k)); };
    for (double s : {1.1, 1.5, 2.0, 2.5, 3.0}) {
        Eigen::VectorXd d(n);
        for (int i = 0; i < n; ++i) d(i) = std::pow(mu[i], s);
        double at = (A * d.asDiagonal()).trace();
        double ta = (d.asDiagonal() * A).trace();
        CHECK(at == ta);
        CHECK(zeta_with_weight(T, s, w) == doctest::Approx(at).epsilon(1e-13));
    }
}

TEST_CASE("heat route") {
    auto h = route_heat(harmonic(), 1.0, 1e-4);
    REQUIRE(h.value.converged);
    CHECK(std::fabs(*h.value.value - 1.0) <= 1e-4);
    CHECK(*h.raw.value == doctest::Approx(std::sqrt(M_PI) / 2).epsilon(1e-8));
    CHECK(h.gamma_const == doctest::Approx(std::sqrt(M_PI) / 2));
    // theta-sum oracle, exact up to exp(-pi^2 lambda^2)
    for (std::size_t i = 2; i < h.lambda_grid.size(); i += 4) {
        double l = h.lambda_grid[i];
        CHECK(h.samples[i] == doctest::Approx((std::sqrt(M_PI) * l / 2 - 0.5) / l).epsilon(1e-11));
    }

    auto h2 = route_heat(sqrt_model(), 2.0, 1e-3);
    REQUIRE(h2.value.converged);
    CHECK(std::fabs(*h2.value.value - 1.0) <= 1e-3);
    CHECK(h2.gamma_const == doctest::Approx(1.0));
    for (std::size_t i = 0; i < h2.lambda_grid.size(); i += 5) {
        double l = h2.lambda_grid[i];
        CHECK(h2.samples[i] == doctest::Approx(1.0 / (l * std::expm1(1.0 / l))).epsilon(1e-11));
    }

    auto fin = route_heat(SpectralModel::finite_diagonal({3, 2, 1}), 1.0, 1e-6);
    REQUIRE(fin.value.converged);
    CHECK(std::fabs(*fin.value.value) <= 1e-6);
    auto tc = route_heat(trace_class(), 1.0, 1e-6);
    REQUIRE(tc.value.converged);
    CHECK(std::fabs(*tc.value.value) <= 1e-6);
}

TEST_CASE("agreement across routes") {
    auto rep = agree(harmonic(), 1.0, 5e-3);
    CHECK(rep.agreed);
    CHECK(rep.all_converged());
    REQUIRE(rep.consensus_value);
    CHECK(std::fabs(*rep.consensus_value - 1.0) <= 5e-3);
    CHECK(rep.routes.size() == 5);

    auto tc = agree(trace_class(), 1.0, 1e-6);
    CHECK(tc.agreed);
    REQUIRE(tc.consensus_value);
    CHECK(std::fabs(*tc.consensus_value) <= 1e-6);

    auto p2 = agree(sqrt_model(), 2.0, 1e-3);
    CHECK(p2.agreed);
    CHECK(std::fabs(*p2.consensus_value - 1.0) <= 1e-3);

    auto osc = agree(oscillatory(), 1.0, 5e-3);
    CHECK_FALSE(osc.any_converged());
    CHECK(osc.agreed);
    CHECK_FALSE(osc.consensus_value);
    for (Route r : {Route::partial_sum, Route::cutoff, Route::stretched_cutoff}) {
        const auto* rr = osc.find(r);
        REQUIRE(rr);
        CHECK(rr->band.liminf_est == doctest::Approx(0.6).epsilon(0.02 / 0.6));
        CHECK(std::fabs(rr->band.limsup_est - 1.4) <= 0.02);
    }

    // a route that cannot run makes the report disagree
    auto bad = agree(sqrt_model(), 1.0, 5e-3);
    CHECK_FALSE(bad.agreed);
    CHECK_FALSE(bad.find(Route::partial_sum)->error.empty());

    // constant weights carry through every route
    auto w3 = SpectralModel::diagonal(Expression::parse("1/(n+1)"), {1, 1, 0}, Expression::parse("3"));
    AgreeOptions o;
    o.weighted = true;
    auto wr = agree(w3, 1.0, 5e-3, o);
    CHECK(wr.agreed);
    CHECK(wr.routes.size() == 5);
    CHECK(std::fabs(*wr.consensus_value - 3.0) <= 5e-3);
}
