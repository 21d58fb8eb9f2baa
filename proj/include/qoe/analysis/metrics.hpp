#pragma once

#include <span>

namespace qoe::analysis {

enum class RSquared {
    kPearson,        ///< squared Pearson correlation between y and ŷ
    kDetermination,  ///< 1 − SS_res / SS_tot
};

/// Throws MetricError on unequal lengths, fewer than two values, or a
/// zero-variance vector (y always; ŷ too under kPearson).
double r_squared(std::span<const double> y, std::span<const double> y_hat, RSquared mode = RSquared::kPearson);

/// Mean absolute error. Throws MetricError on unequal or zero lengths.
double mae(std::span<const double> y, std::span<const double> y_hat);

}  // namespace qoe::analysis
