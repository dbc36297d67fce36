#include "singtrace/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace singtrace {

namespace {

GaussRule build_rule(int n) {
    GaussRule g;
    g.nodes.resize(n);
    g.weights.resize(n);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton on P_n from the Tricomi initial guess
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        g.nodes[i] = -x;
        g.nodes[n - 1 - i] = x;
        g.weights[i] = w;
        g.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) g.nodes[n / 2] = 0.0;
    return g;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    if (n < 1) throw InvalidInput("Gauss-Legendre order must be positive");
    static std::mutex mu;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<GaussRule>(build_rule(n));
    return *slot;
}

}  // namespace singtrace
