#pragma once

#include <span>
#include <variant>
#include <vector>

#include "qoe/dataset/dataset.hpp"
#include "qoe/learners/gbt.hpp"
#include "qoe/learners/mlp.hpp"
#include "qoe/learners/model_tree.hpp"
#include "qoe/learners/spec.hpp"

namespace qoe::learners {

/// A trained predictor of any supported algorithm behind one contract.
///
/// The model's own feature_schema is what it was trained on. A model can be
/// bound to a wider input schema (e.g. after transfer to a node with extra
/// features); predictions then project rows onto the trained columns.
class RegressorModel {
  public:
    using Impl = std::variant<GbtModel, MlpModel, ModelTree>;

    RegressorModel(RegressorSpec spec, Impl impl);

    [[nodiscard]] Algorithm algorithm() const noexcept { return spec_.algorithm; }
    [[nodiscard]] const RegressorSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const Impl& impl() const noexcept { return impl_; }
    [[nodiscard]] const dataset::FeatureSchema& feature_schema() const noexcept;
    /// Schema rows must carry to be predicted; equals feature_schema() unless bound.
    [[nodiscard]] const dataset::FeatureSchema& input_schema() const noexcept { return input_schema_; }

    /// Copy accepting rows of `local`. Throws TransferError naming every
    /// trained feature missing from `local`.
    [[nodiscard]] RegressorModel bind_input(const dataset::FeatureSchema& local) const;

    /// One prediction per row. Throws SchemaError unless rows.schema matches
    /// input_schema() by names and order.
    [[nodiscard]] std::vector<double> predict(const dataset::Dataset& rows) const;
    /// Prediction for a single row laid out per input_schema().
    [[nodiscard]] double predict_row(std::span<const double> row) const;

    [[nodiscard]] const GbtModel* gbt() const noexcept { return std::get_if<GbtModel>(&impl_); }
    [[nodiscard]] const MlpModel* mlp() const noexcept { return std::get_if<MlpModel>(&impl_); }
    [[nodiscard]] const ModelTree* model_tree() const noexcept { return std::get_if<ModelTree>(&impl_); }

  private:
    RegressorSpec spec_;
    Impl impl_;
    dataset::FeatureSchema input_schema_;
    std::vector<std::size_t> projection_;  // empty: identity
};

/// Deterministic given (spec.seed, train). Throws DataError on an empty
/// dataset or non-finite values.
RegressorModel fit(const RegressorSpec& spec, const dataset::Dataset& train);

inline std::vector<double> predict(const RegressorModel& model, const dataset::Dataset& rows) {
    return model.predict(rows);
}

}  // namespace qoe::learners
