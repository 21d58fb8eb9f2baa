#include "qoe/analysis/protocol.hpp"

#include <cmath>
#include <exception>

#include "qoe/error.hpp"

namespace qoe::analysis {

MetricReport summarize(Metric metric, std::span<const double> values) {
    if (values.size() < 2) throw Error("summary statistics need at least two repetitions");
    const auto n = static_cast<double>(values.size());
    const double shift = values.front();
    double sum = 0.0;
    for (double v : values) sum += v - shift;
    const double mean = shift + sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - shift - sum / n) * (v - shift - sum / n);
    const double s = std::sqrt(ss / (n - 1.0));
    return {metric, mean, 1.96 * s / std::sqrt(n), values.size()};
}

ProtocolResult repeated_protocol(const Experiment& experiment, std::size_t n, std::uint64_t base_seed,
                                 std::size_t workers) {
    if (n < 2) throw ConfigError("repeated protocol needs at least two repetitions");
    std::function<MetricPair(std::size_t)> job = [&](std::size_t i) {
        const std::uint64_t seed = base_seed + i;
        try {
            return experiment(seed);
        } catch (const std::exception& e) {
            std::throw_with_nested(Error("repetition with seed " + std::to_string(seed) + " failed: " + e.what()));
        }
    };
    ProtocolResult out;
    out.per_repetition = parallel_indexed<MetricPair>(n, workers, job);
    std::vector<double> r2;
    std::vector<double> mae;
    for (std::size_t i = 0; i < n; ++i) {
        out.seeds.push_back(base_seed + i);
        r2.push_back(out.per_repetition[i].r2);
        mae.push_back(out.per_repetition[i].mae);
    }
    out.r2 = summarize(Metric::kR2, r2);
    out.mae = summarize(Metric::kMae, mae);
    return out;
}

}  // namespace qoe::analysis
