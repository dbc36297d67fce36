#include "singtrace/matrix_lab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <random>

#include "singtrace/errors.hpp"
#include "singtrace/parallel.hpp"

namespace singtrace {

namespace {

constexpr double kPsdFloor = 1e-9;

Eigen::MatrixXd sym(const Eigen::MatrixXd& A) { return 0.5 * (A + A.transpose()); }

void require_symmetric(const Eigen::MatrixXd& A, const char* name) {
    if (A.rows() != A.cols() || A.rows() == 0) throw InvalidInput(std::string(name) + " must be square and nonempty");
    if (A.rows() > 64) throw InvalidInput(std::string(name) + " exceeds dimension 64");
    if (!A.allFinite()) throw InvalidInput(std::string(name) + " has non-finite entries");
    double n = std::max(A.cwiseAbs().maxCoeff(), 1e-300);
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * n)
        throw InvalidInput(std::string(name) + " is not symmetric");
}

Eigen::VectorXd eigs(const Eigen::MatrixXd& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(A), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double min_eig(const Eigen::MatrixXd& A) { return eigs(A).minCoeff(); }

// descending
std::vector<double> singular_values_psd(const Eigen::MatrixXd& A) {
    Eigen::VectorXd e = eigs(A);
    std::vector<double> v(e.data(), e.data() + e.size());
    for (double& x : v) x = std::max(x, 0.0);
    std::sort(v.rbegin(), v.rend());
    return v;
}

struct Parts {
    Eigen::MatrixXd X, Y;  // b^1/2 T b^1/2, b^1/2 T^s b^1/2
    double scale;
};

Parts parts(const MatrixPair& p) {
    Eigen::MatrixXd bh = psd_power(p.b, 0.5);
    Parts r;
    r.X = sym(bh * p.T * bh);
    r.Y = sym(bh * psd_power(p.T, p.s) * bh);
    double tn = std::max(eigs(p.T).maxCoeff(), 0.0);
    r.scale = std::pow(tn, p.s) * std::pow(p.M, p.s);
    return r;
}

void require_loewner_range(const MatrixPair& p) {
    if (!(p.s >= 1.0 && p.s < 2.0)) throw InvalidInput("Loewner inequalities need 1 <= s < 2");
}

PsdReport psd_report(const Eigen::MatrixXd& D, double scale) {
    PsdReport r;
    r.scale = scale;
    r.min_eig = min_eig(D);
    r.psd = r.min_eig >= -kPsdFloor * scale;
    return r;
}

nlohmann::json to_json(const Eigen::MatrixXd& A) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
        rows.push_back(row);
    }
    return rows;
}

void dump_failures(const std::string& path, const TrialOptions& opt, const std::vector<TrialFailure>& f) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["root_seed"] = opt.seed;
    j["dim"] = opt.dim;
    j["failures"] = nlohmann::json::array();
    for (const auto& x : f) {
        j["failures"].push_back({{"trial", x.trial},
                                 {"seed", x.seed},
                                 {"s", x.s},
                                 {"check", x.which},
                                 {"min_eig", x.min_eig},
                                 {"scale", x.scale},
                                 {"T", to_json(x.T)},
                                 {"b", to_json(x.b)}});
    }
    std::ofstream os(path);
    if (!os) throw InvalidInput("cannot write failure dump " + path);
    os << j.dump(2) << "\n";
}

// Hann-windowed mean of w over the upper half of the explicit table; for
// almost periodic w the window error falls off much faster than 1/L
double tail_mean(const std::function<double(double)>& w) {
    const std::size_t a = kDiagonalTable / 2, L = kDiagonalTable - a;
    double acc = 0, wsum = 0;
    for (std::size_t k = 0; k < L; ++k) {
        double h = std::sin(M_PI * (k + 0.5) / L);
        h *= h;
        acc += h * w(static_cast<double>(a + k));
        wsum += h;
    }
    return acc / wsum;
}

double weighted_sum(const SpectralModel& m, double s, const std::function<double(double)>& w) {
    WeightFn f;
    f.at = w;
    f.tail = tail_mean(w);
    return zeta_with_weight(m, s, f);
}

void require_weight(const Expression& b, const SpectralModel& m) {
    if (m.kind() != ModelKind::diagonal_sequence)
        throw InvalidInput("compression residue needs a diagonal_sequence model");
    for (std::size_t n = 0; n < kDiagonalTable; ++n) {
        double v = b(static_cast<double>(n));
        if (!(v > 0) || !std::isfinite(v)) throw InvalidInput("weight must be positive and finite, fails at n = " +
                                                              std::to_string(n));
    }
}

LimitBand extrapolate(const std::vector<double>& s_grid, const std::vector<double>& v, double tol) {
    std::vector<std::size_t> idx(s_grid.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s_grid[a] > s_grid[b]; });
    std::vector<double> r, x, y;
    for (std::size_t i : idx) {
        x.push_back(s_grid[i] - 1.0);
        r.push_back(1.0 / x.back());
        y.push_back(v[i]);
    }
    BandOptions opt = default_band_options(BandMethod::richardson_r);
    opt.windows = 3;
    opt.min_decades = 3.0;
    try {
        return estimate_band(r, x, y, tol, BandMethod::richardson_r, opt);
    } catch (const InsufficientData& e) {
        // too short to extrapolate: report the raw samples as an open band
        LimitBand b;
        b.method = BandMethod::richardson_r;
        auto [lo, hi] = std::minmax_element(y.begin(), y.end());
        b.liminf_est = *lo;
        b.limsup_est = *hi;
        b.band_width = *hi - *lo;
        b.windows = e.what();
        return b;
    }
}

void require_s_grid(const std::vector<double>& s_grid) {
    if (s_grid.size() < 4) throw InvalidInput("s grid needs at least 4 points");
    for (double s : s_grid)
        if (!(s > 1.0)) throw InvalidInput("s grid must lie in (1, inf)");
}

}  // namespace

Eigen::MatrixXd psd_power(const Eigen::MatrixXd& A, double s) {
    if (!(s > 0)) throw InvalidInput("psd_power needs s > 0");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(A));
    Eigen::VectorXd e = es.eigenvalues();
    double floor = 1e-12 * std::max(e.cwiseAbs().maxCoeff(), 1e-300);
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        if (e(i) < -floor) throw DomainError("psd_power of a matrix with a negative eigenvalue");
        e(i) = e(i) <= floor ? 0.0 : std::pow(e(i), s);
    }
    return sym(es.eigenvectors() * e.asDiagonal() * es.eigenvectors().transpose());
}

MatrixPair MatrixPair::make(const Eigen::MatrixXd& T, const Eigen::MatrixXd& b, double s) {
    require_symmetric(T, "T");
    require_symmetric(b, "b");
    if (T.rows() != b.rows()) throw InvalidInput("T and b differ in dimension");
    if (!(s >= 1.0) || !std::isfinite(s)) throw InvalidInput("exponent s must be >= 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(T));
    Eigen::VectorXd e = es.eigenvalues();
    double tn = std::max(e.cwiseAbs().maxCoeff(), 1e-300);
    if (e.minCoeff() < -1e-12 * tn) throw InvalidInput("T is not positive semidefinite");
    MatrixPair p;
    p.T = sym(T);
    if (e.minCoeff() < 0) {
        e = e.cwiseMax(0.0);
        p.T = sym(es.eigenvectors() * e.asDiagonal() * es.eigenvectors().transpose());
    }
    Eigen::VectorXd be = eigs(b);
    if (!(be.minCoeff() > 0)) throw InvalidInput("b is not positive definite");
    p.b = sym(b);
    p.s = s;
    p.m = be.minCoeff();
    p.M = be.maxCoeff();
    return p;
}

PsdReport loewner_upper(const MatrixPair& p) {
    require_loewner_range(p);
    Parts q = parts(p);
    return psd_report(std::pow(p.M, p.s - 1) * q.Y - psd_power(q.X, p.s), q.scale);
}

PsdReport loewner_lower(const MatrixPair& p) {
    require_loewner_range(p);
    Parts q = parts(p);
    return psd_report(psd_power(q.X, p.s) - std::pow(p.m, p.s - 1) * q.Y, q.scale);
}

SingularReport singular_ineq_p(const MatrixPair& p) {
    Parts q = parts(p);
    auto x = singular_values_psd(q.X);
    auto y = singular_values_psd(q.Y);
    double up = std::pow(p.M, p.s - 1), lo = std::pow(p.m, p.s - 1);
    double scale = std::max(q.scale, 1e-300);
    SingularReport r;
    double tx = 0, ty = 0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        double xs = std::pow(x[t], p.s);
        tx += xs;
        ty += y[t];
        double vu = (xs - up * y[t]) / scale;
        double vl = (lo * y[t] - xs) / scale;
        if (vu > r.worst_upper || vl > r.worst_lower) r.worst_t = static_cast<int>(t);
        r.worst_upper = std::max(r.worst_upper, vu);
        r.worst_lower = std::max(r.worst_lower, vl);
    }
    r.holds = r.worst_upper <= kPsdFloor && r.worst_lower <= kPsdFloor;
    double n = static_cast<double>(x.size());
    r.trace_holds = (tx - up * ty) / scale <= kPsdFloor * n && (lo * ty - tx) / scale <= kPsdFloor * n;
    return r;
}

MatrixPair random_pair(std::uint64_t seed, int dim, double s) {
    if (dim < 1 || dim > 64) throw InvalidInput("trial dimension must be in [1, 64]");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N(0.0, 1.0);
    Eigen::MatrixXd G(dim, dim), H(dim, dim);
    for (Eigen::Index i = 0; i < G.size(); ++i) G.data()[i] = N(rng);
    for (Eigen::Index i = 0; i < H.size(); ++i) H.data()[i] = N(rng);
    Eigen::MatrixXd T = sym(G * G.transpose() / dim);
    Eigen::MatrixXd b = sym(H * H.transpose() / dim) + 0.1 * Eigen::MatrixXd::Identity(dim, dim);
    return MatrixPair::make(T, b, s);
}

TrialSuiteReport run_trials(const TrialOptions& opt) {
    if (opt.trials < 1) throw InvalidInput("trial count must be positive");
    if (opt.exponents.empty()) throw InvalidInput("no exponents given");
    auto start = std::chrono::steady_clock::now();
    struct Slot {
        double worst = 0.0;
        std::vector<TrialFailure> failures;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(opt.trials));
    parallel_for(slots.size(), [&](std::size_t i) {
        std::uint64_t seed = derive_seed(opt.seed, i);
        Slot& sl = slots[i];
        for (double s : opt.exponents) {
            MatrixPair p = random_pair(seed, opt.dim, s);
            auto note = [&](const char* which, double me, double scale, bool ok) {
                if (scale > 0) sl.worst = std::min(sl.worst, me / scale);
                if (!ok) sl.failures.push_back({static_cast<int>(i), seed, s, which, me, scale, p.T, p.b});
            };
            if (opt.check == TrialCheck::loewner) {
                auto u = loewner_upper(p);
                auto l = loewner_lower(p);
                note("loewner_upper", u.min_eig, u.scale, u.psd);
                note("loewner_lower", l.min_eig, l.scale, l.psd);
            } else {
                auto r = singular_ineq_p(p);
                double w = std::max(r.worst_upper, r.worst_lower);
                note("singular", -w, 1.0, r.holds);
                if (!r.trace_holds) note("trace", -w, 1.0, false);
            }
        }
    });
    TrialSuiteReport rep;
    rep.trials = opt.trials;
    rep.checks = opt.trials * static_cast<int>(opt.exponents.size()) * (opt.check == TrialCheck::loewner ? 2 : 1);
    for (auto& sl : slots) {
        rep.worst_ratio = std::min(rep.worst_ratio, sl.worst);
        for (auto& f : sl.failures) rep.failures.push_back(std::move(f));
    }
    rep.violations = static_cast<int>(rep.failures.size());
    if (!rep.failures.empty() && !opt.dump_path.empty()) dump_failures(opt.dump_path, opt, rep.failures);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

std::vector<double> default_s_grid() {
    std::vector<double> s;
    for (int k = 2; k <= 14; ++k) s.push_back(1.0 + std::ldexp(1.0, -k));
    return s;
}

CompressionReport compression_residue_compare(const Expression& b_weight, const SpectralModel& model,
                                              const std::vector<double>& s_grid, double tol) {
    require_weight(b_weight, model);
    require_s_grid(s_grid);
    CompressionReport r;
    r.s_grid = s_grid;
    std::size_t n = s_grid.size();
    r.lhs.assign(n, 0.0);
    r.rhs.assign(n, 0.0);
    r.gap.assign(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        double s = s_grid[i];
        auto b = [&](double k) { return b_weight(k); };
        auto bs = [&](double k) { return std::pow(b_weight(k), s); };
        // diagonal b^1/2 T b^1/2 has entries b_n mu_n
        r.lhs[i] = (s - 1) * weighted_sum(model, s, b);
        r.rhs[i] = (s - 1) * weighted_sum(model, s, bs);
        r.gap[i] = (s - 1) * weighted_sum(model, s, [&](double k) { return b(k) - bs(k); });
    });
    r.band = extrapolate(s_grid, r.gap, tol);
    return r;
}

PerturbationReport epsilon_perturbation(const Expression& b_weight, const SpectralModel& model,
                                        const std::vector<double>& eps, double tol) {
    require_weight(b_weight, model);
    if (eps.size() < 2) throw InvalidInput("perturbation fit needs at least two eps values");
    for (double e : eps)
        if (!(e > 0 && e < 1)) throw InvalidInput("eps must lie in (0, 1)");
    auto s_grid = default_s_grid();
    PerturbationReport r;
    r.eps = eps;
    bool all_converged = true;
    for (double e : eps) {
        std::vector<double> v(s_grid.size());
        parallel_for(s_grid.size(), [&](std::size_t i) {
            double s = s_grid[i];
            v[i] = (s - 1) * weighted_sum(model, s, [&](double k) {
                       double b = b_weight(k);
                       return std::pow(b, s) - std::pow(b + e, s);
                   });
        });
        LimitBand band = extrapolate(s_grid, v, tol * e);
        all_converged = all_converged && band.converged;
        r.gap.push_back(band.value ? *band.value : 0.5 * (band.liminf_est + band.limsup_est));
        r.bands.push_back(std::move(band));
    }
    std::size_t n = eps.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        lx[i] = std::log(eps[i]);
        ly[i] = std::log(std::max(std::fabs(r.gap[i]), 1e-300));
        r.C_quarter = std::max(r.C_quarter, std::fabs(r.gap[i]) / std::pow(eps[i], 0.25));
    }
    double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (!(sxx > 0)) throw InvalidInput("eps values must not all coincide");
    r.exponent = sxy / sxx;
    r.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
    r.holds = all_converged && r.exponent >= 0.25 && r.r2 >= 0.9;
    return r;
}

}  // namespace singtrace
