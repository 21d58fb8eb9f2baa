#pragma once

#include <string>
#include <vector>

#include "qoe/dataset/dataset.hpp"
#include "qoe/learners/gbt.hpp"
#include "qoe/learners/regressor.hpp"

namespace qoe::analysis {

struct ShapReport {
    std::vector<std::string> features;
    /// phi[row][feature]
    std::vector<std::vector<double>> phi;
    /// Feature values of the explained rows, same layout as phi.
    std::vector<std::vector<double>> values;
    std::vector<double> predictions;
    double base_value = 0.0;
};

/// Exact Shapley values of a single tree under path-dependent (cover-weighted)
/// conditional expectations, added into `phi` scaled by `scale`.
void tree_shap_single(const learners::DecisionTree& tree, std::span<const double> x, double scale,
                      std::span<double> phi);

/// Cover-weighted mean leaf value of a tree.
double expected_value(const learners::DecisionTree& tree);

/// Path-dependent TreeSHAP over the ensemble. base_value = base_prediction +
/// learning_rate · Σ_t E[tree_t]. Rows must match the model schema.
ShapReport tree_shap(const learners::GbtModel& model, const dataset::Dataset& rows);

/// Throws UnsupportedModelError for non-GBT models.
ShapReport tree_shap(const learners::RegressorModel& model, const dataset::Dataset& rows);

struct ShapSummaryRow {
    std::string feature;
    double mean_abs_phi = 0.0;
    /// Sign of the Pearson correlation between feature value and phi; 0 when
    /// undefined.
    int sign = 0;
};

/// Descending mean |phi|; equal means keep input order.
std::vector<ShapSummaryRow> shap_summary(const ShapReport& report);

}  // namespace qoe::analysis
