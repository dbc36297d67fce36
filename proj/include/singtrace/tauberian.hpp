#pragma once

// Laplace-Stieltjes transforms of increasing step or closed-form functions
// and the classical Karamata comparison h(r)/r vs beta(t)/t.

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "singtrace/expr.hpp"
#include "singtrace/means.hpp"
#include "singtrace/spectral_models.hpp"

namespace singtrace {

enum class MeasureKind { jump_list, jump_sequence, periodic, closed_form, sum };

const char* to_string(MeasureKind k);

// Right-continuous nondecreasing beta with beta(0-) = 0; dbeta is the measure.
class StieltjesMeasure {
public:
    // finitely many jumps (t, c), t >= 0, c >= 0
    static StieltjesMeasure jumps(std::vector<std::pair<double, double>> jumps);
    // jumps c(n) at t(n), n = 0, 1, ...; t increasing, c >= 0, both smooth in n.
    // growth: beta(t) <= c (1+t)^q for t >= t0
    static StieltjesMeasure jump_sequence(const Expression& t, const Expression& c, TailLaw growth);
    // jumps increments[n mod P] at t = n + 1
    static StieltjesMeasure periodic(std::vector<double> increments);
    static StieltjesMeasure closed_form(const Expression& beta, TailLaw growth);
    static StieltjesMeasure sum(const StieltjesMeasure& a, const StieltjesMeasure& b);

    MeasureKind kind() const;
    std::string describe() const;

    struct Impl;

private:
    explicit StieltjesMeasure(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;

    friend double laplace_stieltjes(const StieltjesMeasure& m, double r);
    friend double beta_at(const StieltjesMeasure& m, double t);
};

// h(r) = int_0^inf e^{-t/r} dbeta(t)
double laplace_stieltjes(const StieltjesMeasure& m, double r);
double beta_at(const StieltjesMeasure& m, double t);

struct KaramataOptions {
    GridSpec grid{1e2, 1e8, 16};
};

struct KaramataReport {
    LimitBand band_h;     // h(r)/r, richardson_r
    LimitBand band_beta;  // beta(t)/t, raw tail
    bool consistent = false;
    bool h_unbounded = false;
    bool beta_unbounded = false;
    std::vector<std::string> tags;
    std::vector<double> grid, h_ratio, beta_ratio;
};

KaramataReport karamata_compare(const StieltjesMeasure& m, double tol, const KaramataOptions& opt = {});

// jumps mu_n at u = -log mu_n, so that h(r) = sum_n mu_n^(1 + 1/r)
StieltjesMeasure zeta_measure(const Expression& mu_n, TailLaw growth = {2.0, 1.0, 0.0});

}  // namespace singtrace
