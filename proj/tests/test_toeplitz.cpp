#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "singtrace/errors.hpp"
#include "singtrace/toeplitz.hpp"

using namespace singtrace;

namespace {

// z - 1/2 on the circle, normalized to |u| = 1
Symbol shifted_z() { return Symbol::fourier({{0, cplx(-0.5, 0)}, {1, cplx(1, 0)}}).unitarized(); }

}  // namespace

TEST_CASE("winding number") {
    CHECK(winding_number(Symbol::exponential(3)) == 3);
    CHECK(winding_number(Symbol::exponential(-2)) == -2);
    CHECK(winding_number(shifted_z()) == 1);
    CHECK(winding_number(Symbol::fourier({{0, cplx(1, 0)}})) == 0);
    // 2 + z does not surround the origin
    CHECK(winding_number(Symbol::fourier({{0, cplx(2, 0)}, {1, cplx(1, 0)}})) == 0);
    CHECK_THROWS_AS(winding_number(Symbol::fourier({{0, cplx(-1, 0)}, {1, cplx(1, 0)}})), InvalidInput);
    for (int w = -2; w <= 3; ++w) CHECK(winding_number(Symbol::exponential(w)) == w);
}

TEST_CASE("winding of an expression symbol") {
    auto re = Expression::parse("cos(2*pi*3*s)");
    auto im = Expression::parse("sin(2*pi*3*s)");
    auto u = Symbol::expression(re, im);
    CHECK_FALSE(u.trig_polynomial());
    CHECK(winding_number(u) == 3);
    CHECK(trace_formula_index(u) == doctest::Approx(-3).epsilon(1e-10));
    auto c = u.coefficients(8);
    CHECK(std::abs(c[3] - cplx(1, 0)) < 1e-12);
    CHECK(std::abs(c[0]) < 1e-12);
}

TEST_CASE("trace formula index") {
    for (int n = -2; n <= 3; ++n) CHECK(trace_formula_index(Symbol::exponential(n)) == doctest::Approx(-n).epsilon(1e-12));
    auto u = shifted_z();
    CHECK(trace_formula_index(u) == doctest::Approx(-1).epsilon(1e-10));
    // additivity under products and sign change under conjugation
    auto v = Symbol::exponential(2) * u;
    CHECK(trace_formula_index(v) == doctest::Approx(-3).epsilon(1e-10));
    CHECK(trace_formula_index(v) == doctest::Approx(trace_formula_index(Symbol::exponential(2)) + trace_formula_index(u)).epsilon(1e-10));
    CHECK(trace_formula_index(u.conj()) == doctest::Approx(1).epsilon(1e-10));
    CHECK_THROWS_AS(trace_formula_index(Symbol::fourier({{0, cplx(2, 0)}, {1, cplx(1, 0)}})), InvalidInput);
}

TEST_CASE("near kernel of truncations") {
    auto r = truncated_near_kernel(Symbol::exponential(2), 512);
    CHECK(r.count == 2);
    CHECK(r.count_2N == 2);
    CHECK(r.sign_hint == -2);
    CHECK(r.smallest_regular == doctest::Approx(1.0));
    CHECK(truncated_near_kernel(Symbol::exponential(-3), 64).count == 3);
    CHECK(truncated_near_kernel(Symbol::fourier({{0, cplx(1, 0)}}), 64).count == 0);
    auto g = truncated_near_kernel(Symbol::fourier({{0, cplx(2, 0)}, {1, cplx(1, 0)}}).unitarized(), 128);
    CHECK(g.count == 0);
    CHECK(g.sign_hint == 0);
    // z - 1/2 (not normalized): T_N has one singular value ~ 2^-N
    auto h = truncated_near_kernel(Symbol::fourier({{0, cplx(-0.5, 0)}, {1, cplx(1, 0)}}), 64);
    CHECK(h.count == 1);
    CHECK(h.sign_hint == -1);
    CHECK_THROWS_AS(truncated_near_kernel(Symbol::exponential(1), 100), InvalidInput);
    CHECK_THROWS_AS(truncated_near_kernel(Symbol::exponential(1), 32), InvalidInput);
}

TEST_CASE("commutator diagonal and zeta index") {
    CHECK(commutator_diagonal(Symbol::exponential(1)) == -1.0);
    CHECK(commutator_diagonal(Symbol::exponential(-2)) == 2.0);
    auto z1 = zeta_index(Symbol::exponential(1), 1e-3);
    REQUIRE(z1.band.converged);
    CHECK(std::fabs(*z1.band.value + 1) <= 1e-3);
    auto z0 = zeta_index(Symbol::fourier({{0, cplx(1, 0)}}), 1e-3);
    REQUIRE(z0.band.converged);
    CHECK(*z0.band.value == 0.0);
    // the normalized z - 1/2 has sum_j j |c_j|^2 = 1
    double d = commutator_diagonal(shifted_z());
    CHECK(d == doctest::Approx(-1.0).epsilon(1e-10));
    auto zm = zeta_index(shifted_z(), 5e-2);
    REQUIRE(zm.band.converged);
    CHECK(std::fabs(*zm.band.value + 1) <= 5e-2);
}

TEST_CASE("crossed trace identity") {
    auto gauss = [](double t) { return std::exp(-0.5 * t * t); };
    Decay gd{Decay::Kind::gaussian, 1.0, 0.0};
    auto r = crossed_trace_check(2.0, gauss, {}, gd);
    CHECK(r.rhs == doctest::Approx(2 * std::sqrt(2 * M_PI)).epsilon(1e-12));
    CHECK(r.rel_err <= 1e-6);
    CHECK(r.tail_bound < 1e-300 + 1e-100);
    auto z = crossed_trace_check(0.0, gauss, {}, gd);
    CHECK(z.lhs == 0.0);
    CHECK(z.rhs == 0.0);
    // linearity in a
    auto r3 = crossed_trace_check(3.0, gauss, {}, gd);
    CHECK(r3.lhs == doctest::Approx(1.5 * r.lhs).epsilon(1e-14));

    // algebraic decay: the declared tail beyond lambda must stay below coverage_tol
    auto lor = [](double t) { return 1 / (1 + t * t); };
    Decay ad{Decay::Kind::algebraic, 1.0, 2.0};
    CHECK_THROWS_AS(crossed_trace_check(1.0, lor, {1e-3, 40.0}, ad), InvalidInput);
    auto l = crossed_trace_check(1.0, lor, {1e-2, 1e5}, ad, 1e-4);
    CHECK(l.rhs == doctest::Approx(M_PI).epsilon(1e-12));
    // the truncated grid sum approximates 2 arctan(lambda)
    CHECK(l.lhs == doctest::Approx(2 * std::atan(1e5)).epsilon(1e-8));
    CHECK(l.rel_err <= 1e-4);
    CHECK_THROWS_AS(crossed_trace_check(1.0, gauss, {0.0, 10.0}, gd), InvalidInput);
}
