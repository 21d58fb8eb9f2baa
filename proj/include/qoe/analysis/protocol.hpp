#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qoe::analysis {

enum class Metric { kR2, kMae };

/// mean(ci_half_width) over n_repetitions; the half-width is 1.96·s/√n with
/// s the sample standard deviation.
struct MetricReport {
    Metric metric = Metric::kR2;
    double mean = 0.0;
    double ci_half_width = 0.0;
    std::size_t n_repetitions = 0;
};

/// Sample mean and 95% normal-approximation half-width. Needs ≥ 2 values.
MetricReport summarize(Metric metric, std::span<const double> values);

struct MetricPair {
    double r2 = 0.0;
    double mae = 0.0;
};

struct ProtocolResult {
    MetricReport r2;
    MetricReport mae;
    std::vector<std::uint64_t> seeds;
    std::vector<MetricPair> per_repetition;
};

using Experiment = std::function<MetricPair(std::uint64_t seed)>;

/// Runs `experiment` with seeds base_seed .. base_seed+n−1 on up to `workers`
/// threads (0: hardware concurrency). Results are ordered by seed, so the
/// outcome does not depend on scheduling. A failing repetition aborts the
/// protocol with an Error naming its seed (the lowest one if several fail).
ProtocolResult repeated_protocol(const Experiment& experiment, std::size_t n, std::uint64_t base_seed,
                                 std::size_t workers = 0);

/// Generic form: evaluates job(i) for i in [0, n) across workers and returns
/// results in index order. Rethrows the exception of the lowest failing index.
template <class T>
std::vector<T> parallel_indexed(std::size_t n, std::size_t workers, const std::function<T(std::size_t)>& job);

}  // namespace qoe::analysis

#include "qoe/analysis/protocol_impl.hpp"
