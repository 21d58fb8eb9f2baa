#include "qoe/stacking/stacked.hpp"

#include <algorithm>
#include <cmath>

#include "qoe/error.hpp"

namespace qoe::stacking {

StackedModel::StackedModel(learners::RegressorModel base, learners::RegressorModel local, double w0)
    : base_(std::move(base)), local_(std::move(local)), w0_(w0) {
    if (!(w0 >= 0.0 && w0 <= 1.0)) throw ConfigError("stacking weight w0 must lie in [0, 1]");
    const auto generic = local_.feature_schema().generic_projection().names();
    const auto base_names = base_.feature_schema().names();
    std::size_t k = 0;
    for (const auto& name : generic) {
        if (k < base_names.size() && base_names[k] == name) ++k;
    }
    if (k != base_names.size()) {
        throw SchemaError("base model features are not an ordered subset of the local generic features");
    }
}

std::vector<double> predict_projected(const learners::RegressorModel& model, const dataset::Dataset& rows) {
    if (rows.schema.names() == model.input_schema().names()) return model.predict(rows);
    return model.predict(dataset::select_columns(rows, model.input_schema()));
}

std::vector<double> combine(std::span<const double> base, std::span<const double> local, double w0) {
    if (base.size() != local.size()) throw DataError("prediction vectors differ in length");
    const double w1 = 1.0 - w0;
    std::vector<double> out(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        const double y = w0 * base[i] + w1 * local[i];
        // Rounding can leave the product sum one ulp outside [min, max].
        out[i] = std::clamp(y, std::min(base[i], local[i]), std::max(base[i], local[i]));
    }
    return out;
}

std::vector<double> stack_predict(const StackedModel& stacked, const dataset::Dataset& rows) {
    const auto local = predict_projected(stacked.local(), rows);
    const auto base = predict_projected(stacked.base(), rows);
    return combine(base, local, stacked.w0());
}

std::vector<double> weight_grid(double step) {
    if (!(step > 0.0 && step <= 0.5)) throw ConfigError("weight grid step must lie in (0, 0.5]");
    std::vector<double> grid;
    const double ratio = 1.0 / step;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) < 1e-9) {
        // Exact divisions i/N keep grid points such as 0.3 at their nearest double.
        const auto n = static_cast<std::size_t>(rounded);
        for (std::size_t i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) / static_cast<double>(n));
        return grid;
    }
    for (std::size_t i = 0;; ++i) {
        const double w = static_cast<double>(i) * step;
        if (w >= 1.0) break;
        grid.push_back(w);
    }
    grid.push_back(1.0);
    return grid;
}

WeightScan weight_scan(std::span<const double> base_pred, std::span<const double> local_pred,
                       std::span<const double> truth, double grid_step, analysis::RSquared mode) {
    WeightScan scan;
    for (double w0 : weight_grid(grid_step)) {
        const auto y = combine(base_pred, local_pred, w0);
        scan.curve.push_back({w0, analysis::r_squared(truth, y, mode), analysis::mae(truth, y)});
    }
    for (std::size_t i = 1; i < scan.curve.size(); ++i) {
        if (scan.curve[i].r2 > scan.curve[scan.best].r2) scan.best = i;
    }
    return scan;
}

WeightScan weight_scan(const learners::RegressorModel& base, const learners::RegressorModel& local,
                       const dataset::Dataset& test, double grid_step, analysis::RSquared mode) {
    const auto local_pred = predict_projected(local, test);
    const auto base_pred = predict_projected(base, test);
    const auto truth = test.labels();
    return weight_scan(base_pred, local_pred, truth, grid_step, mode);
}

}  // namespace qoe::stacking
