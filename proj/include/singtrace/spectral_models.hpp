#pragma once

// Operators presented by explicit spectral data.
//
// mu_t is the t-th generalized singular value, F(t) its integral over [0, t].
// For discrete kinds mu_t is the (floor(t)+1)-th largest singular value.

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "singtrace/expr.hpp"
#include "singtrace/xreal.hpp"

namespace singtrace {

enum class ModelKind { closed_form_mu, integrated_form, diagonal_sequence, matrix };

const char* to_string(ModelKind k);

// mu_t <= c (1+t)^-q for t >= t0
struct TailLaw {
    double c = 0.0;
    double q = 0.0;
    double t0 = 0.0;
};

// number of leading diagonal entries held explicitly
constexpr std::size_t kDiagonalTable = 65536;

class SpectralModel {
public:
    static SpectralModel closed_form(const Expression& mu, TailLaw tail,
                                     std::optional<Expression> weight = {});
    static SpectralModel integrated(const Expression& F, TailLaw tail,
                                    std::optional<Expression> weight = {});
    static SpectralModel diagonal(const Expression& entries, TailLaw tail,
                                  std::optional<Expression> weight = {});
    static SpectralModel matrix(const Eigen::MatrixXd& m, std::optional<Expression> weight = {});
    static SpectralModel finite_diagonal(const std::vector<double>& entries,
                                         std::optional<Expression> weight = {});

    // the model of |T|^p
    SpectralModel power(double p) const;

    ModelKind kind() const;
    const TailLaw& tail_law() const;
    bool finite_rank() const;
    std::size_t rank() const;  // finite kinds only
    double exponent() const;   // p when built by power()
    // zeta(s) converges for s > abscissa
    double abscissa() const;
    std::string describe() const;

    bool weighted() const;
    bool weight_constant() const;
    double weight_at(double n) const;
    double weight_tail_mean() const;

    // for discrete kinds: singular values in index order / descending order
    const std::vector<double>& entries() const;
    const std::vector<double>& sorted_entries() const;
    // signed spectrum (eigenvalues when available)
    std::vector<double> eigenvalues(std::size_t max_count) const;

    double mu(double t) const;
    XReal mu(const XReal& t) const;

    struct Impl;
    const Impl& impl() const { return *impl_; }

private:
    explicit SpectralModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

struct IdealParams {
    double p = 1.0;
    double norm_estimate = 0.0;
    double K = 0.0;  // constant in int_0^t mu^p <= K^p int_0^t (1+s)^-p
    double C = 0.0;  // constant in lambda_{1/t} <= C t log t
    bool in_ideal = true;
    double small_ideal_C = 0.0;  // best C with mu_t <= C / t on the grid
    bool small_ideal = true;
    double argmax_t = 0.0;
};

double psi(double p, double t);

double mu_at(const SpectralModel& m, double t);
XReal mu_at(const SpectralModel& m, const XReal& t);

double integral_mu(const SpectralModel& m, double t);
double integral_mu(const SpectralModel& m, const XReal& t);

// lambda_u: number of singular values strictly above u (generalized inverse)
XReal distribution_at(const SpectralModel& m, const XReal& u);
double distribution_at(const SpectralModel& m, double u);

// F(lambda_u), cross-checked against a direct spectral sum when one is available
double cutoff_trace(const SpectralModel& m, const XReal& u);
double cutoff_trace(const SpectralModel& m, double u);

std::vector<double> log_grid(double lo, double hi, int per_decade);

IdealParams ideal_norm(const SpectralModel& m, IdealParams params, const std::vector<double>& t_grid);

struct ZetaOptions {
    // explicit terms before the Euler-Maclaurin tail (diagonal kinds)
    std::size_t direct_terms = kDiagonalTable;
    bool use_weight = false;
};

double zeta(const SpectralModel& m, double s, const ZetaOptions& opt = {});
double zeta_weighted(const SpectralModel& m, double s);

// sum_n w_n f(mu_n) over the spectrum for a caller-supplied weight sequence;
// w_tail stands in for w_n beyond the explicit table
struct WeightFn {
    std::function<double(double)> at;
    double tail = 1.0;
};
double zeta_with_weight(const SpectralModel& m, double s, const WeightFn& w);

double heat_trace(const SpectralModel& m, double lambda, double p, bool weighted = false);

struct SubmajorizationReport {
    bool holds = true;
    double max_violation = 0.0;
    double worst_t = 0.0;
};
SubmajorizationReport submajorizes(const SpectralModel& f, const SpectralModel& g,
                                   const std::vector<double>& grid);

struct IdealBoundReport {
    double K = 0.0;
    double worst_ratio = 0.0;
    double worst_p = 0.0;
    double worst_t = 0.0;
    bool holds = true;
};
IdealBoundReport ideal_bound_check(const SpectralModel& m, const std::vector<double>& p_grid,
                            const std::vector<double>& t_grid, std::optional<double> K = {});

struct DistributionBoundReport {
    bool holds = false;
    double from_t = 0.0;
    double max_t_tested = 0.0;
    double worst_ratio = 0.0;  // lambda_{1/t} / (C t log t) at the largest grid point
};
DistributionBoundReport distribution_bound_check(const SpectralModel& m, double C, const std::vector<double>& t_grid);

}  // namespace singtrace
