#include "qoe/analysis/ks.hpp"

#include <algorithm>
#include <cmath>

#include "qoe/error.hpp"

namespace qoe::analysis {

double kolmogorov_q(double lambda) {
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        sum += sign * std::exp(-2.0 * j * j * lambda * lambda);
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DataError("KS test needs two non-empty samples");
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const auto n1 = static_cast<double>(x.size());
    const auto n2 = static_cast<double>(y.size());

    // Walk the merged support, stepping both ECDFs past each distinct value.
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
    }
    KsResult r;
    r.statistic = d;
    r.n1 = x.size();
    r.n2 = y.size();
    r.p_value = kolmogorov_q(std::sqrt(n1 * n2 / (n1 + n2)) * d);
    return r;
}

std::vector<FeatureKs> ks_feature_screen(const dataset::Dataset& g0, const dataset::Dataset& g1, double alpha) {
    if (g0.schema.names() != g1.schema.names()) throw SchemaError("KS screen needs datasets with one schema");
    std::vector<FeatureKs> out;
    for (std::size_t j = 0; j < g0.schema.size(); ++j) {
        const auto a = g0.column(j);
        const auto b = g1.column(j);
        FeatureKs f{g0.schema[j].name, ks_two_sample(a, b), false};
        f.specific_candidate = f.result.p_value < alpha;
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace qoe::analysis
