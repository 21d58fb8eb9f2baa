#include "qoe/learners/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qoe/error.hpp"
#include "qoe/random.hpp"

namespace qoe::learners {
namespace {

constexpr double kMinSplitGain = 1e-10;

struct NodeStats {
    double g = 0.0;
    double h = 0.0;
};

struct Candidate {
    double gain = -std::numeric_limits<double>::infinity();
    int feature = -1;
    double threshold = 0.0;
    NodeStats left;
};

double leaf_weight(const NodeStats& s, double lambda) {
    // +0.0 turns a negative zero into a positive one.
    return -s.g / (s.h + lambda) + 0.0;
}

}  // namespace

double DecisionTree::predict(std::span<const double> x) const {
    return nodes[static_cast<std::size_t>(leaf_index(x))].value;
}

int DecisionTree::leaf_index(std::span<const double> x) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return i;
}

int DecisionTree::depth() const {
    if (nodes.empty()) return 0;
    std::vector<int> d(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        if (n.is_leaf()) continue;
        d[static_cast<std::size_t>(n.left)] = d[i] + 1;
        d[static_cast<std::size_t>(n.right)] = d[i] + 1;
        deepest = std::max(deepest, d[i] + 1);
    }
    return deepest;
}

double split_gain(double gl, double hl, double gr, double hr, double lambda) {
    const double g = gl + gr;
    const double h = hl + hr;
    return gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda);
}

DecisionTree gbt_build_tree(std::span<const double> gradients, std::span<const double> hessians,
                            const FeatureMatrix& x, std::span<const std::size_t> rows,
                            std::span<const std::size_t> features, const TreeBuildParams& params) {
    DecisionTree tree;
    NodeStats root;
    for (std::size_t r : rows) {
        root.g += gradients[r];
        root.h += hessians[r];
    }
    tree.nodes.push_back({-1, 0.0, -1, -1, leaf_weight(root, params.lambda), root.h});
    if (rows.empty()) return tree;

    // Position p of `rows` lives in node_of[p]; sorted[f] lists positions by
    // ascending feature value (ties by position).
    std::vector<int> node_of(rows.size(), 0);
    std::vector<std::vector<std::size_t>> sorted(features.size());
    for (std::size_t k = 0; k < features.size(); ++k) {
        const std::size_t f = features[k];
        auto& order = sorted[k];
        order.resize(rows.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return x(rows[a], f) < x(rows[b], f); });
    }

    std::vector<NodeStats> stats = {root};
    std::vector<int> frontier = {0};
    for (int depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
        std::vector<int> slot(tree.nodes.size(), -1);
        for (std::size_t s = 0; s < frontier.size(); ++s) slot[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);

        std::vector<Candidate> best(frontier.size());
        std::vector<NodeStats> acc(frontier.size());
        std::vector<double> last(frontier.size());
        std::vector<char> seen(frontier.size());
        // Features ascend and thresholds ascend within a feature, so a strict
        // improvement test implements the tie-break order.
        std::vector<std::size_t> feature_order(features.size());
        std::iota(feature_order.begin(), feature_order.end(), std::size_t{0});
        std::sort(feature_order.begin(), feature_order.end(),
                  [&](std::size_t a, std::size_t b) { return features[a] < features[b]; });
        for (std::size_t k : feature_order) {
            const std::size_t f = features[k];
            std::fill(acc.begin(), acc.end(), NodeStats{});
            std::fill(seen.begin(), seen.end(), 0);
            for (std::size_t p : sorted[k]) {
                const int s = slot[static_cast<std::size_t>(node_of[p])];
                if (s < 0) continue;
                const auto su = static_cast<std::size_t>(s);
                const double v = x(rows[p], f);
                if (seen[su] && v > last[su]) {
                    const NodeStats& total = stats[static_cast<std::size_t>(frontier[su])];
                    const double gr = total.g - acc[su].g;
                    const double hr = total.h - acc[su].h;
                    if (acc[su].h >= params.min_child_weight && hr >= params.min_child_weight) {
                        const double gain = split_gain(acc[su].g, acc[su].h, gr, hr, params.lambda);
                        if (gain > best[su].gain) {
                            double mid = last[su] + (v - last[su]) / 2.0;
                            if (!(mid > last[su])) mid = v;
                            best[su] = {gain, static_cast<int>(f), mid, acc[su]};
                        }
                    }
                }
                acc[su].g += gradients[rows[p]];
                acc[su].h += hessians[rows[p]];
                last[su] = v;
                seen[su] = 1;
            }
        }

        std::vector<int> next;
        for (std::size_t s = 0; s < frontier.size(); ++s) {
            if (!(best[s].gain > kMinSplitGain)) continue;
            const auto parent = static_cast<std::size_t>(frontier[s]);
            const NodeStats left = best[s].left;
            const NodeStats right{stats[parent].g - left.g, stats[parent].h - left.h};
            const int li = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back({-1, 0.0, -1, -1, leaf_weight(left, params.lambda), left.h});
            tree.nodes.push_back({-1, 0.0, -1, -1, leaf_weight(right, params.lambda), right.h});
            stats.push_back(left);
            stats.push_back(right);
            auto& node = tree.nodes[parent];
            node.feature = best[s].feature;
            node.threshold = best[s].threshold;
            node.left = li;
            node.right = li + 1;
            node.value = 0.0;
            next.push_back(li);
            next.push_back(li + 1);
        }
        for (std::size_t p = 0; p < rows.size(); ++p) {
            const auto& n = tree.nodes[static_cast<std::size_t>(node_of[p])];
            if (n.is_leaf()) continue;
            node_of[p] = x(rows[p], static_cast<std::size_t>(n.feature)) < n.threshold ? n.left : n.right;
        }
        frontier = std::move(next);
    }
    return tree;
}

GbtParams GbtParams::from(const RegressorSpec& spec) {
    if (spec.algorithm != Algorithm::kGbt) throw ConfigError("spec is not a GBT spec");
    GbtParams p;
    p.n_rounds = static_cast<std::size_t>(spec.get("n_rounds"));
    p.learning_rate = spec.get("learning_rate");
    p.max_depth = static_cast<int>(spec.get("max_depth"));
    p.subsample = spec.get("subsample");
    p.colsample_bytree = spec.get("colsample_bytree");
    p.lambda = spec.get("lambda");
    p.min_child_weight = spec.get("min_child_weight");
    return p;
}

double GbtModel::predict(std::span<const double> x) const {
    double y = base_prediction;
    for (const auto& t : trees) y += learning_rate * t.predict(x);
    return y;
}

GbtModel fit_gbt(const dataset::Dataset& train, const GbtParams& params, std::uint64_t seed,
                 std::vector<double>* history) {
    if (train.empty()) throw DataError("cannot fit GBT on an empty dataset");
    const auto x = FeatureMatrix::from(train);
    const auto y = train.labels();
    const std::size_t n = y.size();
    const std::size_t p = train.schema.size();

    GbtModel model;
    model.base_prediction = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    model.learning_rate = params.learning_rate;
    model.max_depth = params.max_depth;
    model.feature_schema = train.schema;
    model.trees.reserve(params.n_rounds);

    const TreeBuildParams build{params.max_depth, params.lambda, params.min_child_weight};
    std::vector<double> pred(n, model.base_prediction);
    std::vector<double> grad(n);
    const std::vector<double> hess(n, 1.0);
    Rng rng(seed);

    const auto n_rows = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(params.subsample * static_cast<double>(n) + 0.5)));
    const auto n_cols = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(params.colsample_bytree * static_cast<double>(p) + 0.5)));
    std::vector<std::size_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
    std::vector<std::size_t> all_cols(p);
    std::iota(all_cols.begin(), all_cols.end(), std::size_t{0});

    for (std::size_t round = 0; round < params.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) grad[i] = pred[i] - y[i];

        std::vector<std::size_t> rows = all_rows;
        if (n_rows < n) {
            // Partial Fisher-Yates draw of n_rows distinct rows.
            for (std::size_t i = 0; i < n_rows; ++i) {
                const auto j = i + static_cast<std::size_t>(rng.index(n - i));
                std::swap(rows[i], rows[j]);
            }
            rows.resize(n_rows);
            std::sort(rows.begin(), rows.end());
        }
        std::vector<std::size_t> cols = all_cols;
        if (n_cols < p) {
            for (std::size_t i = 0; i < n_cols; ++i) {
                const auto j = i + static_cast<std::size_t>(rng.index(p - i));
                std::swap(cols[i], cols[j]);
            }
            cols.resize(n_cols);
            std::sort(cols.begin(), cols.end());
        }

        model.trees.push_back(gbt_build_tree(grad, hess, x, rows, cols, build));
        const auto& tree = model.trees.back();
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            pred[i] += model.learning_rate * tree.predict(x.row(i));
            sse += (pred[i] - y[i]) * (pred[i] - y[i]);
        }
        if (history) history->push_back(std::sqrt(sse / static_cast<double>(n)));
    }
    return model;
}

}  // namespace qoe::learners
