#pragma once

#include <span>
#include <string>
#include <vector>

#include "qoe/dataset/dataset.hpp"

namespace qoe::analysis {

struct KsResult {
    double statistic = 0.0;  ///< sup |ECDF_a − ECDF_b|
    double p_value = 1.0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
};

/// Complementary Kolmogorov distribution Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} e^{−2j²λ²},
/// truncated at 100 terms. Returns 1 for λ < 0.2, where 1 − Q < 1e-12.
double kolmogorov_q(double lambda);

/// Two-sided two-sample test. The p-value is asymptotic with λ = √(n1·n2/(n1+n2))·D.
/// Throws DataError if either sample is empty.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

struct FeatureKs {
    std::string feature;
    KsResult result;
    bool specific_candidate = false;  ///< p < alpha
};

/// KS test per feature column of two datasets sharing a schema.
std::vector<FeatureKs> ks_feature_screen(const dataset::Dataset& g0, const dataset::Dataset& g1, double alpha);

}  // namespace qoe::analysis
