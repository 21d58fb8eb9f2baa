#include "qoe/learners/regressor.hpp"

#include <algorithm>

#include "qoe/error.hpp"

namespace qoe::learners {

RegressorModel::RegressorModel(RegressorSpec spec, Impl impl)
    : spec_(std::move(spec)), impl_(std::move(impl)), input_schema_(feature_schema()) {
    const Algorithm held = std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, GbtModel>) return Algorithm::kGbt;
            if constexpr (std::is_same_v<T, MlpModel>) return Algorithm::kMlp;
            return Algorithm::kModelTree;
        },
        impl_);
    if (held != spec_.algorithm) throw ConfigError("spec algorithm does not match model implementation");
}

const dataset::FeatureSchema& RegressorModel::feature_schema() const noexcept {
    return std::visit([](const auto& m) -> const dataset::FeatureSchema& { return m.feature_schema; }, impl_);
}

RegressorModel RegressorModel::bind_input(const dataset::FeatureSchema& local) const {
    RegressorModel out = *this;
    out.projection_.clear();
    std::string missing;
    for (const auto& e : feature_schema().entries()) {
        const auto idx = local.index_of(e.name);
        if (!idx) {
            missing += (missing.empty() ? "" : ", ") + e.name;
            continue;
        }
        out.projection_.push_back(*idx);
    }
    if (!missing.empty()) throw TransferError("model features absent from local schema: " + missing);
    out.input_schema_ = local;
    if (local.names() == feature_schema().names()) out.projection_.clear();
    return out;
}

std::vector<double> RegressorModel::predict(const dataset::Dataset& rows) const {
    const auto expected = input_schema_.names();
    const auto got = rows.schema.names();
    if (expected != got) {
        std::string missing;
        std::string extra;
        for (const auto& n : expected) {
            if (std::find(got.begin(), got.end(), n) == got.end()) missing += (missing.empty() ? "" : ", ") + n;
        }
        for (const auto& n : got) {
            if (std::find(expected.begin(), expected.end(), n) == expected.end()) extra += (extra.empty() ? "" : ", ") + n;
        }
        std::string msg = "rows do not match model schema";
        if (!missing.empty()) msg += "; missing: " + missing;
        if (!extra.empty()) msg += "; unexpected: " + extra;
        if (missing.empty() && extra.empty()) msg += "; feature order differs";
        throw SchemaError(msg);
    }
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& v = rows.rows[i].values;
        if (v.size() != expected.size()) {
            throw SchemaError("row " + std::to_string(i) + " length does not match schema");
        }
        out.push_back(predict_row(v));
    }
    return out;
}

double RegressorModel::predict_row(std::span<const double> row) const {
    if (projection_.empty()) {
        return std::visit([&](const auto& m) { return m.predict(row); }, impl_);
    }
    std::vector<double> projected;
    projected.reserve(projection_.size());
    for (std::size_t j : projection_) projected.push_back(row[j]);
    return std::visit([&](const auto& m) { return m.predict(projected); }, impl_);
}

RegressorModel fit(const RegressorSpec& spec, const dataset::Dataset& train) {
    if (train.empty()) throw DataError("cannot fit a model on an empty dataset");
    dataset::check_conforms(train);
    switch (spec.algorithm) {
        case Algorithm::kGbt: return {spec, fit_gbt(train, GbtParams::from(spec), spec.seed)};
        case Algorithm::kMlp: return {spec, fit_mlp(train, MlpParams::from(spec), spec.seed)};
        case Algorithm::kModelTree: return {spec, model_tree_fit(train, ModelTreeParams::from(spec))};
    }
    throw ConfigError("unknown algorithm");
}

}  // namespace qoe::learners
