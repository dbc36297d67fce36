#pragma once

// Four routes to the Dixmier trace and their cross-check.

#include <optional>
#include <string>
#include <vector>

#include "singtrace/means.hpp"
#include "singtrace/spectral_models.hpp"

namespace singtrace {

enum class Route { partial_sum, cutoff, stretched_cutoff, zeta, heat };

const char* to_string(Route r);
Route route_from_string(const std::string& s);

// Raw route limit = route_constant * tau_w(A T^p):
// zeta residue p, heat Gamma(1 + p/2) (Gamma(3/2) at p = 1), others 1.
double route_constant(Route r, double p);
// raw band -> Dixmier value
LimitBand normalize(const LimitBand& raw, Route r, double p);

// throws NotInIdeal unless F(t) = O(log t); m must already be the p-th power
void require_dixmier_ideal(const SpectralModel& m);

// t -> F(t) / log(1+t) on u = ln t in [1, 1e6]
LimitBand route_partial_sum(const SpectralModel& m, double tol);
// t -> F(lambda_{1/t}) / log(1+t), or F(C t log t) / log(1+t) when stretched
LimitBand route_cutoff(const SpectralModel& m, double tol, std::optional<double> stretch = {});

struct ZetaProbe {
    double p = 1.0;
    bool weighted = false;
    std::vector<double> r_grid;
    std::vector<double> samples;  // (s - p) zeta(s) at s = p + 1/r
    LimitBand raw;                // estimates p tau_w(A T^p)
    LimitBand value;              // raw / p
    std::string note;
};
ZetaProbe route_zeta(const SpectralModel& m, double p, double tol, bool weighted = false);

struct HeatProbe {
    double p = 1.0;
    bool weighted = false;
    std::vector<double> lambda_grid;
    std::vector<double> samples;  // heat_trace(lambda) / lambda
    double gamma_const = 1.0;
    LimitBand raw;
    LimitBand value;
    std::string note;
};
HeatProbe route_heat(const SpectralModel& m, double p, double tol, bool weighted = false);

struct RouteResult {
    Route route;
    LimitBand band;  // normalized to tau_w
    std::string grid_spec;
    std::string error;  // set when the route could not run
};

struct TraceReport {
    std::vector<RouteResult> routes;
    bool agreed = false;
    std::optional<double> consensus_value;
    double tolerance = 0.0;
    double p = 1.0;

    const RouteResult* find(Route r) const;
    bool all_converged() const;
    bool any_converged() const;
};

struct AgreeOptions {
    std::vector<Route> routes{Route::partial_sum, Route::cutoff, Route::stretched_cutoff, Route::zeta, Route::heat};
    double stretch = 5.0;
    bool weighted = false;
};

TraceReport agree(const SpectralModel& m, double p, double tol, const AgreeOptions& opt = {});

}  // namespace singtrace
