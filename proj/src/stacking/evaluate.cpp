#include "qoe/stacking/evaluate.hpp"

#include "qoe/error.hpp"
#include "qoe/stacking/stacked.hpp"

namespace qoe::stacking {

Evaluation evaluate(const learners::RegressorModel& model, const dataset::Dataset& test, analysis::RSquared mode) {
    const auto pred = predict_projected(model, test);
    const auto truth = test.labels();
    return {analysis::r_squared(truth, pred, mode), analysis::mae(truth, pred)};
}

std::vector<CrossCell> cross_evaluate(const learners::RegressorModel& model, const std::string& train_group,
                                      const std::vector<NamedDataset>& test_sets, analysis::RSquared mode) {
    std::vector<CrossCell> cells;
    for (const auto& [name, data] : test_sets) {
        CrossCell cell{train_group, name, std::nullopt, std::nullopt, {}};
        try {
            cell.result = evaluate(model, data, mode);
        } catch (const DataError& e) {
            cell.error = e.what();
        }
        cells.push_back(std::move(cell));
    }
    const CrossCell* own = nullptr;
    for (const auto& c : cells) {
        if (c.test_group == train_group && c.result) own = &c;
    }
    if (own) {
        const double own_r2 = own->result->r2;
        for (auto& c : cells) {
            if (c.result && c.test_group != train_group) c.delta_r2 = own_r2 - c.result->r2;
        }
    }
    return cells;
}

}  // namespace qoe::stacking
