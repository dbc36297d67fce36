#pragma once

// Hardy and Cesaro means, the transforms T_b, D_a, P^a, L, and the
// limit-band estimator used wherever a limit along t -> inf is wanted.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace singtrace {

struct GridSpec {
    double t_min = 1.0;
    double t_max = 1e8;
    int per_decade = 64;
};

std::vector<double> make_grid(const GridSpec& spec);

// A bounded function sampled on an increasing log-spaced grid.
// When log_abscissa is set the grid variable is u = ln t, so that data
// reaching t far past the double range can still be carried.
struct GridFunction {
    std::vector<double> grid;
    std::vector<double> values;
    std::function<double(double)> eval;  // empty for tabulated data
    bool log_abscissa = false;

    static GridFunction sample(std::function<double(double)> f, const GridSpec& spec);
    static GridFunction tabulated(std::vector<double> grid, std::vector<double> values, bool log_abscissa = false);

    // eval if present, else interpolation linear in ln t with constant extension
    double at(double x) const;
    double sup_abs() const;
    double decades() const;
};

GridFunction hardy_mean(const GridFunction& f);
GridFunction cesaro_mean(const GridFunction& g);

enum class TransformKind { translate, dilate, power, log_substitute };
GridFunction transform(const GridFunction& f, TransformKind kind, double param = 0.0);

struct CommutationReport {
    double translation_residual = 0.0;  // max |(H T_b - T_b H) f| over the last decade
    double translation_bound = 0.0;     // 2 sup|f| |b| / (t + b) at the start of that decade
    double dilation_residual = 0.0;     // max |(M D_a - D_a M) f| over the last decade
    double identity_residual = 0.0;     // worst pointwise residual of the exact identities
    double t_end = 0.0;
};
CommutationReport commutation_residuals(const GridFunction& f, double a, double b);

enum class BandMethod { raw_tail, richardson_log, richardson_r, cesaro_iterate };
const char* to_string(BandMethod m);

struct LimitBand {
    bool converged = false;
    std::optional<double> value;
    double liminf_est = 0.0;
    double limsup_est = 0.0;
    double band_width = 0.0;
    BandMethod method = BandMethod::raw_tail;
    std::string windows;
    double fit_residual = 0.0;
    double stability = 0.0;
    int iterations = 0;

    LimitBand scaled(double factor) const;
    bool overlaps(const LimitBand& o, double slack = 0.0) const;
};

struct BandOptions {
    int windows = 3;            // tail windows, one decade of the scale variable each
    double min_decades = 6.0;
    // correction exponents of the small parameter x beyond the constant term
    std::vector<double> exponents;
    bool log_term = false;      // include x ln(1/x)
    int max_iterations = 64;    // cesaro_iterate
};

BandOptions default_band_options(BandMethod m);

// scale: increasing positive abscissa whose decades define the windows;
// x: the small parameter at each sample
LimitBand estimate_band(std::span<const double> scale, std::span<const double> x,
                        std::span<const double> values, double tol, BandMethod method,
                        const BandOptions& opt);

// x = 1/ln t (1/u on log abscissas) for richardson_log, 1/t for richardson_r
LimitBand limit_band(const GridFunction& f, double tol, BandMethod method);
LimitBand limit_band(const GridFunction& f, double tol, BandMethod method, const BandOptions& opt);

}  // namespace singtrace
