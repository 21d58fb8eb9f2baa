#pragma once

#include <span>
#include <vector>

#include "qoe/analysis/metrics.hpp"
#include "qoe/dataset/dataset.hpp"
#include "qoe/learners/regressor.hpp"

namespace qoe::stacking {

/// Convex combination of a transferred generic base model and a local model:
/// y' = w0·base(x_GF) + w1·local(x), w1 = 1 − w0.
class StackedModel {
  public:
    /// Throws ConfigError for w0 outside [0, 1] and SchemaError unless the
    /// base features are an ordered subsequence of the local model's
    /// generic features.
    StackedModel(learners::RegressorModel base, learners::RegressorModel local, double w0);

    [[nodiscard]] double w0() const noexcept { return w0_; }
    [[nodiscard]] double w1() const noexcept { return 1.0 - w0_; }
    [[nodiscard]] const learners::RegressorModel& base() const noexcept { return base_; }
    [[nodiscard]] const learners::RegressorModel& local() const noexcept { return local_; }

  private:
    learners::RegressorModel base_;
    learners::RegressorModel local_;
    double w0_;
};

/// Predictions of `model` on `rows`, selecting the model's input columns
/// from a wider row schema when needed.
std::vector<double> predict_projected(const learners::RegressorModel& model, const dataset::Dataset& rows);

/// Elementwise w0·base + (1 − w0)·local, kept inside [min, max] of the pair.
std::vector<double> combine(std::span<const double> base, std::span<const double> local, double w0);

std::vector<double> stack_predict(const StackedModel& stacked, const dataset::Dataset& rows);

/// {0, step, 2·step, …, 1}; 1 is always the last point. Requires 0 < step ≤ 0.5.
std::vector<double> weight_grid(double step);

struct ScanPoint {
    double w0 = 0.0;
    double r2 = 0.0;
    double mae = 0.0;
};

struct WeightScan {
    std::vector<ScanPoint> curve;
    std::size_t best = 0;  ///< argmax R², lowest w0 on ties

    [[nodiscard]] const ScanPoint& optimum() const { return curve.at(best); }
};

/// Stacked R² and MAE on `test` at every grid weight.
WeightScan weight_scan(const learners::RegressorModel& base, const learners::RegressorModel& local,
                       const dataset::Dataset& test, double grid_step,
                       analysis::RSquared mode = analysis::RSquared::kPearson);

/// Same scan from precomputed prediction vectors.
WeightScan weight_scan(std::span<const double> base_pred, std::span<const double> local_pred,
                       std::span<const double> truth, double grid_step,
                       analysis::RSquared mode = analysis::RSquared::kPearson);

}  // namespace qoe::stacking
