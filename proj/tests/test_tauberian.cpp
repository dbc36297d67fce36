#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <random>

#include "singtrace/dixmier.hpp"
#include "singtrace/errors.hpp"
#include "singtrace/tauberian.hpp"

using namespace singtrace;

namespace {

// zeta(1 + e) from its Laurent series with the first two Stieltjes constants
double zeta_near_one(double e) {
    const double g0 = 0.57721566490153286, g1 = -0.072815845483676725, g2 = -0.0096903631928723185;
    return 1 / e + g0 - g1 * e + 0.5 * g2 * e * e;
}

StieltjesMeasure unit_jumps() {
    return StieltjesMeasure::jump_sequence(Expression::parse("n+1"), Expression::parse("1"), {2, 1, 0});
}

}  // namespace

TEST_CASE("laplace_stieltjes examples") {
    CHECK(laplace_stieltjes(unit_jumps(), 100) == doctest::Approx(1 / std::expm1(0.01)).epsilon(1e-12));
    CHECK(laplace_stieltjes(StieltjesMeasure::periodic({1.0}), 100) == doctest::Approx(1 / std::expm1(0.01)).epsilon(1e-13));
    auto lin = StieltjesMeasure::closed_form(Expression::parse("t"), {2, 1, 0});
    CHECK(laplace_stieltjes(lin, 7) == doctest::Approx(7.0).epsilon(1e-12));
    auto one = StieltjesMeasure::jumps({{2.0, 5.0}});
    CHECK(laplace_stieltjes(one, 1) == doctest::Approx(5 * std::exp(-2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(laplace_stieltjes(one, 0.0), DomainError);

    // beta(t) = t^2: h(r) = 2 r^2
    auto sq = StieltjesMeasure::closed_form(Expression::parse("t^2"), {2, 2, 0});
    CHECK(laplace_stieltjes(sq, 3) == doctest::Approx(18.0).epsilon(1e-12));
    // brute force beyond the explicit head for a smooth jump sequence
    auto js = StieltjesMeasure::jump_sequence(Expression::parse("n+1"), Expression::parse("1/(n+1)"), {2, 1, 0});
    double r = 5e4, brute = 0;
    for (int n = 4000000; n >= 1; --n) brute += std::exp(-n / r) / n;
    CHECK(laplace_stieltjes(js, r) == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("beta_at") {
    auto u = unit_jumps();
    CHECK(beta_at(u, 0.5) == 0.0);
    CHECK(beta_at(u, 1.0) == 1.0);
    CHECK(beta_at(u, 1e6) == doctest::Approx(1e6).epsilon(1e-14));
    CHECK(beta_at(u, 1e6 - 0.5) == doctest::Approx(1e6 - 1).epsilon(1e-14));
    CHECK(beta_at(u, 123456.7) == 123456.0);
    auto p = StieltjesMeasure::periodic({1.0, 0.0, 2.0});
    CHECK(beta_at(p, 3.0) == 3.0);
    CHECK(beta_at(p, 7.5) == 1 + 0 + 2 + 1 + 0 + 2 + 1);
    auto js = StieltjesMeasure::jump_sequence(Expression::parse("n+1"), Expression::parse("1/(n+1)"), {2, 1, 0});
    double h = 0;
    for (int n = 1; n <= 300000; ++n) h += 1.0 / n;
    CHECK(beta_at(js, 300000.5) == doctest::Approx(h).epsilon(1e-13));
}

TEST_CASE("construction contracts") {
    CHECK_THROWS_AS(StieltjesMeasure::jumps({{1.0, -1.0}}), InvalidInput);
    CHECK_THROWS_AS(StieltjesMeasure::periodic({}), InvalidInput);
    CHECK_THROWS_AS(StieltjesMeasure::closed_form(Expression::parse("1+t"), {2, 1, 0}), InvalidInput);
    CHECK_THROWS_AS(StieltjesMeasure::closed_form(Expression::parse("sin(t)"), {2, 1, 0}), InvalidInput);
    CHECK_THROWS_AS(StieltjesMeasure::closed_form(Expression::parse("exp(t)-1"), {2, 3, 0}), InvalidInput);
    CHECK_THROWS_AS(StieltjesMeasure::jump_sequence(Expression::parse("1-n"), Expression::parse("1"), {2, 1, 0}),
                    InvalidInput);
}

TEST_CASE("linearity") {
    auto a = unit_jumps();
    auto b = StieltjesMeasure::jumps({{0.5, 2.0}, {3.0, 1.5}});
    auto c = StieltjesMeasure::closed_form(Expression::parse("t^2/(1+t)"), {2, 1, 0});
    auto ab = StieltjesMeasure::sum(a, b);
    auto abc = StieltjesMeasure::sum(ab, c);
    for (double r : {0.3, 2.0, 50.0, 1e4}) {
        CHECK(laplace_stieltjes(ab, r) == doctest::Approx(laplace_stieltjes(a, r) + laplace_stieltjes(b, r)).epsilon(1e-12));
        CHECK(laplace_stieltjes(abc, r) ==
              doctest::Approx(laplace_stieltjes(ab, r) + laplace_stieltjes(c, r)).epsilon(1e-12));
    }
    CHECK(beta_at(abc, 3.0) == doctest::Approx(3 + 3.5 + 9.0 / 4).epsilon(1e-14));
}

TEST_CASE("karamata on unit jumps") {
    auto u = unit_jumps();
    double r = 1e6;
    CHECK(std::fabs(laplace_stieltjes(u, r) / r - beta_at(u, r) / r) <= 1e-5);
    auto rep = karamata_compare(u, 1e-5);
    CHECK(rep.consistent);
    REQUIRE(rep.band_h.converged);
    REQUIRE(rep.band_beta.converged);
    CHECK(std::fabs(*rep.band_h.value - 1) <= 1e-5);
    CHECK(std::fabs(*rep.band_beta.value - 1) <= 1e-5);
    CHECK(rep.tags.empty());

    auto lin = karamata_compare(StieltjesMeasure::closed_form(Expression::parse("t"), {2, 1, 0}), 1e-9);
    for (double v : lin.beta_ratio) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
    for (double v : lin.h_ratio) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lin.consistent);
}

TEST_CASE("karamata on random bounded increments") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> U(0, 2);
    std::uniform_int_distribution<int> P(1, 24);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> inc(P(rng));
        double mean = 0;
        for (double& c : inc) mean += (c = U(rng));
        mean /= inc.size();
        auto rep = karamata_compare(StieltjesMeasure::periodic(inc), 1e-3);
        CHECK(rep.consistent);
        REQUIRE(rep.band_h.converged);
        CHECK(*rep.band_h.value == doctest::Approx(mean).epsilon(1e-9));
    }
}

TEST_CASE("divergent ratios are tagged") {
    auto m = StieltjesMeasure::jump_sequence(Expression::parse("n"), Expression::parse("n"), {1, 2, 0});
    auto rep = karamata_compare(m, 1e-3);
    CHECK(rep.h_unbounded);
    CHECK(rep.beta_unbounded);
    CHECK(rep.consistent);
    CHECK_FALSE(rep.band_h.converged);
    CHECK(std::find(rep.tags.begin(), rep.tags.end(), "vacuous") != rep.tags.end());
}

TEST_CASE("zeta route factors through the measure of jumps mu_n at -log mu_n") {
    auto zm = zeta_measure(Expression::parse("1/(n+1)"));
    CHECK(laplace_stieltjes(zm, 16.0) == doctest::Approx(boost::math::zeta(1 + 1 / 16.0)).epsilon(1e-12));
    for (double r : {1000.0, 1e6}) CHECK(laplace_stieltjes(zm, r) == doctest::Approx(zeta_near_one(1 / r)).epsilon(1e-13));
    auto rep = karamata_compare(zm, 1e-3);
    CHECK(rep.consistent);
    auto z = route_zeta(SpectralModel::diagonal(Expression::parse("1/(n+1)"), {1, 1, 0}), 1.0, 1e-3);
    REQUIRE(rep.band_h.converged);
    REQUIRE(rep.band_beta.converged);
    CHECK(std::fabs(*rep.band_h.value - *z.raw.value) <= 1e-3);
    CHECK(std::fabs(*rep.band_beta.value - *z.raw.value) <= 1e-3);
}
