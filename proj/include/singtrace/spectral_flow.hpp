#pragma once

// Spectral flow of D_t = D0 + t A, t in [0, 1], for finite real symmetric
// matrices and for the truncated lattice D0 = diag(k), |k| <= K, shifted by n.
//
// Convention: a branch going from < 0 to >= 0 counts +1. The lattice shift
// u e_k = e_(k+n) gives u D0 u* = D0 - n and every method returns -n.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "singtrace/means.hpp"

namespace singtrace {

enum class PathKind { matrix, lattice };

class OperatorPath {
public:
    static OperatorPath matrix(const Eigen::MatrixXd& D0, const Eigen::MatrixXd& A);
    // A = u D0 u* - D0 for a real orthogonal u
    static OperatorPath from_unitary(const Eigen::MatrixXd& D0, const Eigen::MatrixXd& u);
    static OperatorPath lattice(int K, int n);

    PathKind kind() const { return kind_; }
    int dim() const;
    int K() const { return K_; }
    int shift() const { return n_; }
    bool has_unitary() const { return u_.has_value(); }
    const Eigen::MatrixXd& D0() const { return D0_; }
    const Eigen::MatrixXd& A() const { return A_; }
    double scale() const;  // bound on |D_t|, t in [0, 1]
    std::string describe() const;

    // ascending eigenvalues of D_t
    Eigen::VectorXd eigenvalues(double t) const;

private:
    PathKind kind_ = PathKind::matrix;
    Eigen::MatrixXd D0_, A_;
    std::optional<Eigen::MatrixXd> u_;
    int K_ = 0, n_ = 0;
    double scale_ = 1.0;
};

// n + 1 equispaced points of [0, 1]
std::vector<double> uniform_samples(int n);

struct CrossingOptions {
    int max_depth = 40;  // bisections of one sample interval
};

int sf_crossings(const OperatorPath& path, const std::vector<double>& t_samples, const CrossingOptions& opt = {});

struct PartitionOptions {
    double rank_threshold = 1e-8;  // relative to the largest singular value
    int max_depth = 30;
};

// sum of ind(P_(i-1) P_i) with P_t the projection onto D_t >= 0. The partition
// is refined until |F_(i-1) - F_i| < 1/2, F = D (1 + D^2)^-1/2.
int sf_partition(const OperatorPath& path, const std::vector<double>& partition, const PartitionOptions& opt = {});

// sqrt(pi) Gamma((p-1)/2) / Gamma(p/2) = int_R (1 + x^2)^(-p/2) dx
double ctilde(double p);
double ctilde_quadrature(double p);

// tau(A (1 + D_t^2)^(-p/2)), lattice traces with analytic tails beyond |k| = K
double sf_integrand(const OperatorPath& path, double t, double p);

struct IntegralResult {
    double value = 0.0;  // integral / ctilde
    double raw = 0.0;
    int nodes = 0;
    double last_change = 0.0;
};

// Gauss-Legendre in t from 32 nodes, doubled until the change is below tol
IntegralResult sf_integral(const OperatorPath& path, double p, double tol = 1e-4);

struct ZetaFlow {
    std::vector<double> p_grid, samples;
    LimitBand band;
};

// 1/2 (p-1) tau(u[D0,u*] (1 + D0^2)^(-p/2)) at p = 1 + 2^-j, j = 2..20
ZetaFlow sf_zeta(const OperatorPath& path, double tol);

// sum over k in Z of (1 + (k - c)^2)^(-p/2); explicit for |k| <= K, Euler-Maclaurin beyond
double lattice_sum(int K, double c, double p);
// the same band for an operator whose diagonal against D0 = diag(k) is the constant d
ZetaFlow constant_diagonal_zeta(double d, double tol);

struct SweepReport {
    double sup = 0.0;
    double argmax_t = 0.0, argmax_p = 0.0;
    bool finite = true;
    std::vector<double> t_grid, p_grid;
    std::vector<double> values;  // row-major in (t, p)
};

// tau(B [(1 + D0^2)^(-p/2) - (1 + D_t^2)^(-p/2)]) on the grid
SweepReport uniform_bound_sweep(const OperatorPath& path, const Eigen::MatrixXd& B, const std::vector<double>& p_grid,
                          const std::vector<double>& t_grid);
// B = b I; the only form accepted on the lattice
SweepReport uniform_bound_sweep(const OperatorPath& path, double b, const std::vector<double>& p_grid,
                          const std::vector<double>& t_grid);

struct SfReport {
    int sf_crossings = 0;
    int sf_partition = 0;
    IntegralResult sf_integral;
    double p = 1.5;
    std::optional<ZetaFlow> sf_zeta;  // lattice only
    double ctilde = 0.0;
    bool integral_applies = false;  // path generated by a unitary
    bool agreement = false;
};

struct SfOptions {
    double p = 1.5;
    int samples = 64;
    int partition = 64;
    double integral_tol = 0.02;
    double zeta_tol = 5e-3;
};

SfReport spectral_flow_report(const OperatorPath& path, const SfOptions& opt = {});

}  // namespace singtrace
