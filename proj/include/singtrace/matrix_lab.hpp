#pragma once

// Finite-dimensional checks of the Loewner and singular-value inequalities
// for (b^1/2 T b^1/2)^s, and the compression residue on diagonal models.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "singtrace/expr.hpp"
#include "singtrace/means.hpp"
#include "singtrace/spectral_models.hpp"

namespace singtrace {

// f(A) for symmetric A by spectral decomposition; eigenvalues below
// 1e-12 * |A| are clamped to 0 before x^s is applied.
Eigen::MatrixXd psd_power(const Eigen::MatrixXd& A, double s);

struct MatrixPair {
    Eigen::MatrixXd T, b;
    double s = 1.0;
    double m = 0.0, M = 0.0;  // spectral bounds of b

    // validates symmetry, T >= 0, b > 0 and s >= 1; clamps tiny negative eigenvalues of T
    static MatrixPair make(const Eigen::MatrixXd& T, const Eigen::MatrixXd& b, double s);
};

struct PsdReport {
    bool psd = false;
    double min_eig = 0.0;
    double scale = 0.0;  // |T|^s M^s
};

// M^(s-1) b^1/2 T^s b^1/2 - (b^1/2 T b^1/2)^s >= 0, 1 <= s < 2
PsdReport loewner_upper(const MatrixPair& p);
// (b^1/2 T b^1/2)^s - m^(s-1) b^1/2 T^s b^1/2 >= 0, 1 <= s < 2
PsdReport loewner_lower(const MatrixPair& p);

struct SingularReport {
    bool holds = true;
    double worst_upper = 0.0;  // largest violation of mu_t(X)^s <= M^(s-1) mu_t(Y), scaled
    double worst_lower = 0.0;
    int worst_t = -1;
    bool trace_holds = true;  // the same constants on the traces
};

// X = b^1/2 T b^1/2, Y = b^1/2 T^s b^1/2, checked at every t < dim
SingularReport singular_ineq_p(const MatrixPair& p);

enum class TrialCheck { loewner, singular };

struct TrialOptions {
    std::uint64_t seed = 1;
    int trials = 1000;
    int dim = 8;
    std::vector<double> exponents{1.1, 1.5, 1.9};
    TrialCheck check = TrialCheck::loewner;
    std::string dump_path;  // failures written here as JSON when non-empty
};

struct TrialFailure {
    int trial = 0;
    std::uint64_t seed = 0;
    double s = 0.0;
    std::string which;
    double min_eig = 0.0;
    double scale = 0.0;
    Eigen::MatrixXd T, b;
};

struct TrialSuiteReport {
    int trials = 0;
    int checks = 0;
    int violations = 0;
    double worst_ratio = 0.0;  // most negative min_eig / scale seen
    double seconds = 0.0;
    std::vector<TrialFailure> failures;
};

// Wishart T, shifted-Wishart b, one seed per trial derived from the root
MatrixPair random_pair(std::uint64_t seed, int dim, double s);
TrialSuiteReport run_trials(const TrialOptions& opt);

struct CompressionReport {
    std::vector<double> s_grid;
    std::vector<double> lhs;  // (s-1) tau(b T^s)
    std::vector<double> rhs;  // (s-1) tau((b^1/2 T b^1/2)^s)
    std::vector<double> gap;  // lhs - rhs
    LimitBand band;           // extrapolation of gap to s = 1
};

// s = 1 + 2^-k, k = 2..14
std::vector<double> default_s_grid();

// b_weight: positive bounded sequence in n; model: diagonal_sequence kind
CompressionReport compression_residue_compare(const Expression& b_weight, const SpectralModel& model,
                                              const std::vector<double>& s_grid, double tol = 1e-3);

struct PerturbationReport {
    std::vector<double> eps;
    std::vector<double> gap;  // lim (s-1)[tau((b^1/2 T b^1/2)^s) - tau(((b+e)^1/2 T (b+e)^1/2)^s)]
    std::vector<LimitBand> bands;
    double exponent = 0.0;   // least-squares slope of log|gap| on log eps
    double r2 = 0.0;
    double C_quarter = 0.0;  // smallest C with |gap| <= C eps^(1/4) on the grid
    bool holds = false;      // exponent >= 1/4 and r2 >= 0.9
};

PerturbationReport epsilon_perturbation(const Expression& b_weight, const SpectralModel& model,
                                        const std::vector<double>& eps = {1e-2, 3e-3, 1e-3, 3e-4, 1e-4},
                                        double tol = 1e-3);

}  // namespace singtrace
