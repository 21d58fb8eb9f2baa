#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qoe/dataset/dataset.hpp"
#include "qoe/learners/matrix.hpp"
#include "qoe/learners/spec.hpp"

namespace qoe::learners {

/// Node of a regression tree. Rows with x[feature] < threshold go left.
/// `cover` is the hessian mass of the training rows that reached the node.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    double cover = 0.0;

    [[nodiscard]] bool is_leaf() const noexcept { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

/// Node 0 is the root.
struct DecisionTree {
    std::vector<TreeNode> nodes;

    [[nodiscard]] double predict(std::span<const double> x) const;
    [[nodiscard]] int leaf_index(std::span<const double> x) const;
    /// Edges on the longest root-to-leaf path.
    [[nodiscard]] int depth() const;

    bool operator==(const DecisionTree&) const = default;
};

struct TreeBuildParams {
    int max_depth = 4;
    double lambda = 1.0;
    double min_child_weight = 1.0;
};

/// Second-order split gain (without the conventional 1/2 factor):
/// GL²/(HL+λ) + GR²/(HR+λ) − G²/(H+λ).
double split_gain(double gl, double hl, double gr, double hr, double lambda);

/// Grows one depth-limited tree greedily on the given rows and features.
/// Leaf value is −ΣG/(ΣH+λ). Ties in gain keep the lowest feature index, then
/// the lowest threshold.
DecisionTree gbt_build_tree(std::span<const double> gradients, std::span<const double> hessians,
                            const FeatureMatrix& x, std::span<const std::size_t> rows,
                            std::span<const std::size_t> features, const TreeBuildParams& params);

struct GbtParams {
    std::size_t n_rounds = 2000;
    double learning_rate = 0.004;
    int max_depth = 4;
    double subsample = 0.5;
    double colsample_bytree = 1.0;
    double lambda = 1.0;
    double min_child_weight = 1.0;

    static GbtParams from(const RegressorSpec& spec);
};

/// Boosted ensemble for squared error. Leaf values are stored unscaled.
struct GbtModel {
    double base_prediction = 0.0;
    double learning_rate = 0.0;
    int max_depth = 0;
    std::vector<DecisionTree> trees;
    dataset::FeatureSchema feature_schema;

    /// base_prediction + Σ_t learning_rate · leaf_t(x), accumulated in tree order.
    [[nodiscard]] double predict(std::span<const double> x) const;

    bool operator==(const GbtModel&) const = default;
};

/// Optional per-round training RMSE (over all rows) is appended to `history`.
GbtModel fit_gbt(const dataset::Dataset& train, const GbtParams& params, std::uint64_t seed,
                 std::vector<double>* history = nullptr);

}  // namespace qoe::learners
