#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qoe/analysis/metrics.hpp"
#include "qoe/dataset/dataset.hpp"
#include "qoe/learners/regressor.hpp"

namespace qoe::stacking {

struct Evaluation {
    double r2 = 0.0;
    double mae = 0.0;
};

/// R² and MAE of the model on `test`, projecting columns where needed.
Evaluation evaluate(const learners::RegressorModel& model, const dataset::Dataset& test,
                    analysis::RSquared mode = analysis::RSquared::kPearson);

struct CrossCell {
    std::string train_group;
    std::string test_group;
    std::optional<Evaluation> result;
    /// R² on the training group's own test set minus R² here.
    std::optional<double> delta_r2;
    /// Non-empty when the cell could not be evaluated.
    std::string error;
};

using NamedDataset = std::pair<std::string, dataset::Dataset>;

/// One cell per test set. Schema problems mark the cell instead of aborting.
std::vector<CrossCell> cross_evaluate(const learners::RegressorModel& model, const std::string& train_group,
                                      const std::vector<NamedDataset>& test_sets,
                                      analysis::RSquared mode = analysis::RSquared::kPearson);

}  // namespace qoe::stacking
