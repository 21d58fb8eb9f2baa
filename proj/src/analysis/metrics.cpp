#include "qoe/analysis/metrics.hpp"

#include <cmath>

#include "qoe/error.hpp"

namespace qoe::analysis {

double r_squared(std::span<const double> y, std::span<const double> y_hat, RSquared mode) {
    if (y.size() != y_hat.size()) throw MetricError("R²: vectors differ in length");
    if (y.size() < 2) throw MetricError("R²: needs at least two values");
    const auto n = static_cast<double>(y.size());
    double my = 0.0;
    double mp = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        my += y[i];
        mp += y_hat[i];
    }
    my /= n;
    mp /= n;
    double syy = 0.0;
    double spp = 0.0;
    double syp = 0.0;
    double sse = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double dy = y[i] - my;
        const double dp = y_hat[i] - mp;
        syy += dy * dy;
        spp += dp * dp;
        syp += dy * dp;
        sse += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
    }
    if (!(syy > 0.0)) throw MetricError("R²: truth has zero variance");
    if (mode == RSquared::kDetermination) return 1.0 - sse / syy;
    if (!(spp > 0.0)) throw MetricError("R²: predictions have zero variance");
    return (syp * syp) / (syy * spp);
}

double mae(std::span<const double> y, std::span<const double> y_hat) {
    if (y.size() != y_hat.size()) throw MetricError("MAE: vectors differ in length");
    if (y.empty()) throw MetricError("MAE: empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - y_hat[i]);
    return s / static_cast<double>(y.size());
}

}  // namespace qoe::analysis
