#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "qoe/dataset/dataset.hpp"
#include "qoe/learners/matrix.hpp"
#include "qoe/learners/spec.hpp"

namespace qoe::learners {

/// y = intercept + Σ coefficients[j]·x[j] over the full feature schema.
struct LinearModel {
    std::vector<double> coefficients;
    double intercept = 0.0;
    /// Set when the least-squares system was singular and the model fell
    /// back to the mean of the labels.
    bool intercept_only_fallback = false;

    [[nodiscard]] double evaluate(std::span<const double> x) const;
    [[nodiscard]] std::size_t parameter_count() const;

    bool operator==(const LinearModel&) const = default;
};

/// Least squares over the given rows. Columns constant on those rows get a
/// zero coefficient; a rank-deficient remainder falls back to the mean.
LinearModel fit_linear(const FeatureMatrix& x, std::span<const double> y, std::span<const std::size_t> rows);

/// Every node carries the linear model fitted on its own training rows; the
/// models of inner nodes are used for smoothing.
struct ModelTreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::size_t n_samples = 0;
    LinearModel model;

    [[nodiscard]] bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const ModelTreeNode&) const = default;
};

struct ModelTreeParams {
    std::size_t min_leaf = 4;
    double smoothing_k = 15.0;
    bool smoothing = true;
    bool prune = true;
    double std_fraction = 0.05;

    static ModelTreeParams from(const RegressorSpec& spec);
};

/// M5-style model tree. Node 0 is the root.
struct ModelTree {
    std::vector<ModelTreeNode> nodes;
    std::size_t min_leaf = 4;
    double smoothing_k = 15.0;
    bool smoothing = true;
    dataset::FeatureSchema feature_schema;

    /// Leaf model, smoothed toward each ancestor's model when enabled:
    /// p ← (n·p + k·q)/(n + k), with n the training size of the child below.
    [[nodiscard]] double predict(std::span<const double> x) const;
    [[nodiscard]] double predict_unsmoothed(std::span<const double> x) const;
    [[nodiscard]] std::size_t fallback_count() const;

    bool operator==(const ModelTree&) const = default;
};

/// Grows by standard-deviation reduction until a child would hold fewer than
/// min_leaf rows or the node's label std drops below std_fraction of the
/// root's, then (optionally) prunes bottom-up wherever the node's own model
/// has an error estimate no worse than its subtree.
ModelTree model_tree_fit(const dataset::Dataset& train, const ModelTreeParams& params);

std::size_t count_leaves(const ModelTree& tree);
std::set<std::string> decision_features(const ModelTree& tree);

}  // namespace qoe::learners
