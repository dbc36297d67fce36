#include "singtrace/spectral_flow.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "singtrace/errors.hpp"
#include "singtrace/parallel.hpp"
#include "singtrace/quadrature.hpp"
#include "singtrace/series.hpp"

namespace singtrace {

namespace {

constexpr double kZeroTol = 1e-13;  // relative to the path scale

void require_symmetric(const Eigen::MatrixXd& M, const char* name) {
    if (M.rows() != M.cols() || M.rows() == 0) throw InvalidInput(std::string(name) + " must be square and nonempty");
    if (M.rows() > 4096) throw InvalidInput(std::string(name) + " exceeds dimension 4096");
    if (!M.allFinite()) throw InvalidInput(std::string(name) + " has non-finite entries");
    double n = std::max(M.cwiseAbs().maxCoeff(), 1.0);
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * n)
        throw InvalidInput(std::string(name) + " is not symmetric");
}

Eigen::MatrixXd sym(const Eigen::MatrixXd& M) { return 0.5 * (M + M.transpose()); }

// sum_{k >= a} (1 + (k - c)^2)^(-p/2), a integer >= 1 and a > c
double lattice_tail(double a, double c, double p) {
    auto f = [c, p](const auto& x) {
        using S = std::decay_t<decltype(x)>;
        using std::pow;
        S y = x - S(c);
        return pow(S(1.0) + y * y, -0.5 * p);
    };
    return euler_maclaurin_tail(f, a);
}

double f_of(double x) { return x / std::sqrt(1.0 + x * x); }

struct Spectrum {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;  // empty on the lattice (identity)
};

Spectrum spectrum(const OperatorPath& P, double t, bool vectors) {
    Spectrum s;
    if (P.kind() == PathKind::lattice) {
        s.values = P.eigenvalues(t);
        return s;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(P.D0() + t * P.A()),
                                                       vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    s.values = es.eigenvalues();
    if (vectors) s.vectors = es.eigenvectors();
    return s;
}

bool nonneg(double x, double scale) { return x >= -kZeroTol * scale; }

// branch of b matched to each branch of a; sorted order when overlaps are ambiguous
std::vector<int> match(const Spectrum& a, const Spectrum& b) {
    int n = static_cast<int>(a.values.size());
    std::vector<int> pi(n);
    std::iota(pi.begin(), pi.end(), 0);
    if (a.vectors.size() == 0) return pi;
    Eigen::MatrixXd ov = (a.vectors.transpose() * b.vectors).cwiseAbs();
    std::vector<char> used(n, 0);
    for (int i = 0; i < n; ++i) {
        Eigen::Index j;
        ov.row(i).maxCoeff(&j);
        if (used[j]) {
            std::iota(pi.begin(), pi.end(), 0);
            return pi;
        }
        used[j] = 1;
        pi[i] = static_cast<int>(j);
    }
    return pi;
}

double local_gap(const Eigen::VectorXd& v, int i) {
    double g = std::numeric_limits<double>::infinity();
    if (i > 0) g = std::min(g, v(i) - v(i - 1));
    if (i + 1 < v.size()) g = std::min(g, v(i + 1) - v(i));
    return g;
}

int count_interval(const OperatorPath& P, double ta, const Spectrum& a, double tb, const Spectrum& b, int depth,
                   const CrossingOptions& opt) {
    double scale = P.scale();
    auto pi = match(a, b);
    bool refine = false;
    std::vector<int> suspect;
    for (int i = 0; i < a.values.size(); ++i) {
        double va = a.values(i), vb = b.values(pi[i]);
        // only branches that may meet zero in the interval matter
        double reach = std::fabs(vb - va);
        if (std::min(std::fabs(va), std::fabs(vb)) > reach + kZeroTol * scale) continue;
        if (reach > 0.5 * local_gap(a.values, i)) {
            refine = true;
            suspect.push_back(i);
        }
    }
    if (refine) {
        if (depth < opt.max_depth && tb - ta > 1e-15) {
            double tm = 0.5 * (ta + tb);
            Spectrum m = spectrum(P, tm, true);
            return count_interval(P, ta, a, tm, m, depth + 1, opt) + count_interval(P, tm, m, tb, b, depth + 1, opt);
        }
        for (int i : suspect) {
            if (local_gap(a.values, i) <= 1e-10 * std::max(scale, 1.0)) {
                std::ostringstream os;
                os << "eigenvalues collide at 0 near t = " << ta
                   << "; perturb the path generically, e.g. D0 + eps I with eps = 1e-8";
                throw DegenerateCrossing(os.str());
            }
        }
    }
    int sf = 0;
    for (int i = 0; i < a.values.size(); ++i) {
        bool sa = nonneg(a.values(i), scale), sb = nonneg(b.values(pi[i]), scale);
        if (!sa && sb) ++sf;
        if (sa && !sb) --sf;
    }
    return sf;
}

void require_samples(const std::vector<double>& t) {
    if (t.size() < 2) throw InvalidInput("need at least two samples");
    if (t.front() != 0.0 || t.back() != 1.0) throw InvalidInput("samples must start at 0 and end at 1");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) throw InvalidInput("samples must be strictly increasing");
}

// spectra at partition points, each computed once
class SpectrumCache {
public:
    explicit SpectrumCache(const OperatorPath& P) : P_(P) {}
    const Spectrum& at(double t) {
        auto it = cache_.find(t);
        if (it == cache_.end()) it = cache_.emplace(t, spectrum(P_, t, true)).first;
        return it->second;
    }

private:
    const OperatorPath& P_;
    std::map<double, Spectrum> cache_;
};

// |F_a - F_b| in operator norm
double f_gap(const OperatorPath& P, const Spectrum& a, const Spectrum& b) {
    if (P.kind() == PathKind::lattice) {
        double g = 0;
        for (Eigen::Index i = 0; i < a.values.size(); ++i)
            g = std::max(g, std::fabs(f_of(a.values(i)) - f_of(b.values(i))));
        return g;  // beyond |k| = K the difference only decreases
    }
    auto F = [](const Spectrum& s) {
        Eigen::VectorXd v = s.values.unaryExpr([](double x) { return f_of(x); });
        return Eigen::MatrixXd(s.vectors * v.asDiagonal() * s.vectors.transpose());
    };
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> d(sym(F(a) - F(b)), Eigen::EigenvaluesOnly);
    return d.eigenvalues().cwiseAbs().maxCoeff();
}

// ind(P_a P_b : ran P_b -> ran P_a)
int index_pair(const OperatorPath& P, const Spectrum& a, const Spectrum& b, const PartitionOptions& opt) {
    double scale = P.scale();
    if (P.kind() == PathKind::lattice) {
        // coordinate projections: the rank of the product is the overlap count
        int ra = 0, rb = 0, both = 0;
        for (Eigen::Index i = 0; i < a.values.size(); ++i) {
            bool ia = nonneg(a.values(i), scale), ib = nonneg(b.values(i), scale);
            ra += ia;
            rb += ib;
            both += ia && ib;
        }
        return (rb - both) - (ra - both);
    }
    auto basis = [&](const Spectrum& s) {
        std::vector<Eigen::Index> cols;
        for (Eigen::Index i = 0; i < s.values.size(); ++i)
            if (nonneg(s.values(i), scale)) cols.push_back(i);
        Eigen::MatrixXd V(s.vectors.rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j) V.col(static_cast<Eigen::Index>(j)) = s.vectors.col(cols[j]);
        return V;
    };
    Eigen::MatrixXd Va = basis(a), Vb = basis(b);
    int ra = static_cast<int>(Va.cols()), rb = static_cast<int>(Vb.cols());
    int rank = 0;
    if (ra > 0 && rb > 0) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(Va.transpose() * Vb);
        auto sv = svd.singularValues();
        double top = std::max(sv(0), 1.0);
        for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > opt.rank_threshold * top;
    }
    return (rb - rank) - (ra - rank);
}

int partition_interval(const OperatorPath& P, SpectrumCache& C, double ta, double tb, int depth,
                       const PartitionOptions& opt) {
    const Spectrum& a = C.at(ta);
    const Spectrum& b = C.at(tb);
    if (f_gap(P, a, b) < 0.5) return index_pair(P, a, b, opt);
    if (depth >= opt.max_depth) {
        std::ostringstream os;
        os << "partition cannot be refined to |F_s - F_t| < 1/2 near t = " << ta
           << "; perturb the path generically, e.g. D0 + eps I with eps = 1e-8";
        throw DegenerateCrossing(os.str());
    }
    double tm = 0.5 * (ta + tb);
    return partition_interval(P, C, ta, tm, depth + 1, opt) + partition_interval(P, C, tm, tb, depth + 1, opt);
}

void require_p(double p) {
    if (!(p > 1.0 && p < 2.0)) throw DomainError("sf_integral needs p in (1, 2)");
}

}  // namespace

OperatorPath OperatorPath::matrix(const Eigen::MatrixXd& D0, const Eigen::MatrixXd& A) {
    require_symmetric(D0, "D0");
    require_symmetric(A, "A");
    if (D0.rows() != A.rows()) throw InvalidInput("D0 and A differ in dimension");
    OperatorPath p;
    p.kind_ = PathKind::matrix;
    p.D0_ = sym(D0);
    p.A_ = sym(A);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> a(p.D0_, Eigen::EigenvaluesOnly), b(p.A_, Eigen::EigenvaluesOnly);
    p.scale_ = std::max(1.0, a.eigenvalues().cwiseAbs().maxCoeff() + b.eigenvalues().cwiseAbs().maxCoeff());
    return p;
}

OperatorPath OperatorPath::from_unitary(const Eigen::MatrixXd& D0, const Eigen::MatrixXd& u) {
    require_symmetric(D0, "D0");
    if (u.rows() != D0.rows() || u.cols() != D0.cols()) throw InvalidInput("u and D0 differ in dimension");
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(u.rows(), u.cols());
    if ((u.transpose() * u - I).cwiseAbs().maxCoeff() > 1e-10) throw InvalidInput("u is not orthogonal");
    OperatorPath p = matrix(D0, sym(u * D0 * u.transpose() - D0));
    p.u_ = u;
    return p;
}

OperatorPath OperatorPath::lattice(int K, int n) {
    if (K < 1) throw InvalidInput("lattice needs K >= 1");
    if (2 * std::abs(n) + 1 > K) throw InvalidInput("lattice shift too large for K");
    OperatorPath p;
    p.kind_ = PathKind::lattice;
    p.K_ = K;
    p.n_ = n;
    p.scale_ = K + std::abs(n);
    return p;
}

int OperatorPath::dim() const { return kind_ == PathKind::lattice ? 2 * K_ + 1 : static_cast<int>(D0_.rows()); }

double OperatorPath::scale() const { return scale_; }

std::string OperatorPath::describe() const {
    std::ostringstream os;
    if (kind_ == PathKind::lattice) os << "lattice K=" << K_ << " n=" << n_;
    else os << "matrix dim=" << D0_.rows() << (u_ ? " unitary" : "");
    return os.str();
}

Eigen::VectorXd OperatorPath::eigenvalues(double t) const {
    if (kind_ == PathKind::lattice) {
        Eigen::VectorXd v(2 * K_ + 1);
        for (int k = -K_; k <= K_; ++k) v(k + K_) = k - n_ * t;
        return v;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(D0_ + t * A_), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

std::vector<double> uniform_samples(int n) {
    if (n < 1) throw InvalidInput("need at least one interval");
    std::vector<double> t(n + 1);
    for (int i = 0; i <= n; ++i) t[i] = static_cast<double>(i) / n;
    return t;
}

int sf_crossings(const OperatorPath& path, const std::vector<double>& t, const CrossingOptions& opt) {
    require_samples(t);
    int sf = 0;
    Spectrum a = spectrum(path, t[0], true);
    for (std::size_t i = 1; i < t.size(); ++i) {
        Spectrum b = spectrum(path, t[i], true);
        sf += count_interval(path, t[i - 1], a, t[i], b, 0, opt);
        a = std::move(b);
    }
    return sf;
}

int sf_partition(const OperatorPath& path, const std::vector<double>& partition, const PartitionOptions& opt) {
    require_samples(partition);
    SpectrumCache cache(path);
    int sf = 0;
    for (std::size_t i = 1; i < partition.size(); ++i)
        sf += partition_interval(path, cache, partition[i - 1], partition[i], 0, opt);
    return sf;
}

double lattice_sum(int K, double c, double p) {
    if (!(p > 1.0)) throw DivergenceError("lattice sum diverges for p <= 1", 1.0);
    if (K < 1 || std::fabs(c) >= K) throw InvalidInput("lattice sum needs |c| < K");
    double acc = 0;
    for (int k = -K; k <= K; ++k) {
        double y = k - c;
        acc += std::pow(1.0 + y * y, -0.5 * p);
    }
    return acc + lattice_tail(K + 1.0, c, p) + lattice_tail(K + 1.0, -c, p);
}

double ctilde(double p) {
    if (!(p > 1.0)) throw DomainError("ctilde needs p > 1");
    return std::sqrt(M_PI) * std::exp(std::lgamma(0.5 * (p - 1)) - std::lgamma(0.5 * p));
}

double ctilde_quadrature(double p) {
    if (!(p > 1.0)) throw DomainError("ctilde needs p > 1");
    auto f = [p](double x) { return std::pow(1.0 + x * x, -0.5 * p); };
    double head = integrate(f, 0.0, 1.0, 1e-15);
    // x = e^u on [1, inf): e^u (1 + e^2u)^(-p/2) = exp((1 - p) u - p/2 log(1 + e^-2u))
    double tail = integrate_to_infinity(
        [p](double u) { return std::exp((1 - p) * u - 0.5 * p * std::log1p(std::exp(-2 * u))); }, 0.0, 1e-15);
    return 2 * (head + tail);
}

double sf_integrand(const OperatorPath& path, double t, double p) {
    if (path.kind() == PathKind::lattice) return -path.shift() * lattice_sum(path.K(), path.shift() * t, p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(path.D0() + t * path.A()));
    Eigen::MatrixXd AV = es.eigenvectors().transpose() * path.A() * es.eigenvectors();
    double acc = 0;
    for (Eigen::Index j = 0; j < AV.rows(); ++j) {
        double l = es.eigenvalues()(j);
        acc += AV(j, j) * std::pow(1.0 + l * l, -0.5 * p);
    }
    return acc;
}

IntegralResult sf_integral(const OperatorPath& path, double p, double tol) {
    require_p(p);
    auto rule = [&](int n) {
        const GaussRule& g = gauss_legendre(n);
        std::vector<double> v(g.nodes.size());
        parallel_for(v.size(), [&](std::size_t i) { v[i] = sf_integrand(path, 0.5 * (g.nodes[i] + 1), p); });
        double acc = 0;
        for (std::size_t i = 0; i < v.size(); ++i) acc += 0.5 * g.weights[i] * v[i];
        return acc;
    };
    IntegralResult r;
    int n = 32;
    double prev = rule(n);
    for (;;) {
        double next = rule(2 * n);
        n *= 2;
        r.last_change = std::fabs(next - prev);
        prev = next;
        if (r.last_change < tol || n >= 1024) break;
    }
    r.nodes = n;
    r.raw = prev;
    r.value = prev / ctilde(p);
    return r;
}

ZetaFlow constant_diagonal_zeta(double d, double tol) {
    ZetaFlow z;
    for (int j = 2; j <= 20; ++j) z.p_grid.push_back(1.0 + std::ldexp(1.0, -j));
    z.samples.assign(z.p_grid.size(), 0.0);
    parallel_for(z.p_grid.size(), [&](std::size_t i) {
        double p = z.p_grid[i];
        z.samples[i] = 0.5 * (p - 1) * d * lattice_sum(64, 0.0, p);
    });
    std::vector<double> r, x, y;
    for (std::size_t i = 0; i < z.p_grid.size(); ++i) {
        x.push_back(z.p_grid[i] - 1);
        r.push_back(1.0 / x.back());
        y.push_back(z.samples[i]);
    }
    BandOptions opt = default_band_options(BandMethod::richardson_r);
    opt.min_decades = 3.0;
    z.band = estimate_band(r, x, y, tol, BandMethod::richardson_r, opt);
    z.band.windows = "p=1+2^-j j=2..20; " + z.band.windows;
    return z;
}

ZetaFlow sf_zeta(const OperatorPath& path, double tol) {
    if (path.kind() != PathKind::lattice) throw InvalidInput("sf_zeta needs a lattice path");
    // u[D0,u*] = -n I
    return constant_diagonal_zeta(-path.shift(), tol);
}

SweepReport uniform_bound_sweep(const OperatorPath& path, const Eigen::MatrixXd& B, const std::vector<double>& p_grid,
                          const std::vector<double>& t_grid) {
    if (path.kind() == PathKind::lattice) throw InvalidInput("lattice sweeps take a scalar B");
    if (B.rows() != path.dim() || B.cols() != path.dim()) throw InvalidInput("B has the wrong dimension");
    SweepReport r;
    r.t_grid = t_grid;
    r.p_grid = p_grid;
    r.values.assign(t_grid.size() * p_grid.size(), 0.0);
    auto trace_f = [&](double t, double p) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym(path.D0() + t * path.A()));
        Eigen::VectorXd f = es.eigenvalues().unaryExpr([p](double l) { return std::pow(1.0 + l * l, -0.5 * p); });
        Eigen::MatrixXd BV = es.eigenvectors().transpose() * B * es.eigenvectors();
        return (BV.diagonal().array() * f.array()).sum();
    };
    parallel_for(r.values.size(), [&](std::size_t idx) {
        double t = t_grid[idx / p_grid.size()], p = p_grid[idx % p_grid.size()];
        r.values[idx] = trace_f(0.0, p) - trace_f(t, p);
    });
    for (std::size_t idx = 0; idx < r.values.size(); ++idx) {
        double v = std::fabs(r.values[idx]);
        if (!std::isfinite(v)) r.finite = false;
        else if (v > r.sup) {
            r.sup = v;
            r.argmax_t = t_grid[idx / p_grid.size()];
            r.argmax_p = p_grid[idx % p_grid.size()];
        }
    }
    return r;
}

SweepReport uniform_bound_sweep(const OperatorPath& path, double b, const std::vector<double>& p_grid,
                          const std::vector<double>& t_grid) {
    if (path.kind() == PathKind::matrix)
        return uniform_bound_sweep(path, Eigen::MatrixXd(b * Eigen::MatrixXd::Identity(path.dim(), path.dim())), p_grid,
                             t_grid);
    for (double p : p_grid)
        if (!(p > 1.0)) throw DomainError("lattice sweep needs p > 1");
    SweepReport r;
    r.t_grid = t_grid;
    r.p_grid = p_grid;
    r.values.assign(t_grid.size() * p_grid.size(), 0.0);
    int K = path.K(), n = path.shift();
    parallel_for(r.values.size(), [&](std::size_t idx) {
        double t = t_grid[idx / p_grid.size()], p = p_grid[idx % p_grid.size()];
        r.values[idx] = b * (lattice_sum(K, 0.0, p) - lattice_sum(K, n * t, p));
    });
    for (std::size_t idx = 0; idx < r.values.size(); ++idx) {
        double v = std::fabs(r.values[idx]);
        if (!std::isfinite(v)) r.finite = false;
        else if (v > r.sup) {
            r.sup = v;
            r.argmax_t = t_grid[idx / p_grid.size()];
            r.argmax_p = p_grid[idx % p_grid.size()];
        }
    }
    return r;
}

SfReport spectral_flow_report(const OperatorPath& path, const SfOptions& opt) {
    SfReport r;
    r.p = opt.p;
    r.ctilde = ctilde(opt.p);
    r.sf_crossings = sf_crossings(path, uniform_samples(opt.samples));
    r.sf_partition = sf_partition(path, uniform_samples(opt.partition));
    r.sf_integral = sf_integral(path, opt.p);
    r.integral_applies = path.kind() == PathKind::lattice || path.has_unitary();
    bool ok = r.sf_crossings == r.sf_partition;
    if (r.integral_applies) ok = ok && std::fabs(r.sf_integral.value - r.sf_crossings) <= opt.integral_tol;
    if (path.kind() == PathKind::lattice) {
        r.sf_zeta = sf_zeta(path, opt.zeta_tol);
        const LimitBand& b = r.sf_zeta->band;
        ok = ok && b.converged && std::fabs(*b.value - r.sf_crossings) <= opt.zeta_tol;
    }
    r.agreement = ok;
    return r;
}

}  // namespace singtrace
