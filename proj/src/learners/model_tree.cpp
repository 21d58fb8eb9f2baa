#include "qoe/learners/model_tree.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "qoe/error.hpp"

namespace qoe::learners {
namespace {

double population_sd(std::span<const double> y, std::span<const std::size_t> rows) {
    if (rows.empty()) return 0.0;
    double mean = 0.0;
    for (std::size_t r : rows) mean += y[r];
    mean /= static_cast<double>(rows.size());
    double ss = 0.0;
    for (std::size_t r : rows) ss += (y[r] - mean) * (y[r] - mean);
    return std::sqrt(ss / static_cast<double>(rows.size()));
}

double mean_of(std::span<const double> y, std::span<const std::size_t> rows) {
    double s = 0.0;
    for (std::size_t r : rows) s += y[r];
    return s / static_cast<double>(rows.size());
}

struct Builder {
    const FeatureMatrix& x;
    const std::vector<double>& y;
    const ModelTreeParams& params;
    double root_sd = 0.0;
    std::vector<ModelTreeNode> nodes;
    std::vector<std::vector<std::size_t>> rows_of;

    int grow(std::vector<std::size_t> rows) {
        const int id = static_cast<int>(nodes.size());
        nodes.push_back({});
        rows_of.emplace_back();
        {
            auto& node = nodes.back();
            node.n_samples = rows.size();
            node.model = fit_linear(x, y, rows);
        }
        const double sd = population_sd(y, rows);
        if (rows.size() < 2 * params.min_leaf || sd <= params.std_fraction * root_sd) {
            rows_of[static_cast<std::size_t>(id)] = std::move(rows);
            return id;
        }

        const std::size_t n = rows.size();
        const double node_mean = mean_of(y, rows);
        double best_sdr = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::size_t> order(rows);
        std::vector<double> s1(n + 1);
        std::vector<double> s2(n + 1);
        for (std::size_t f = 0; f < x.cols(); ++f) {
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
            for (std::size_t i = 0; i < n; ++i) {
                const double d = y[order[i]] - node_mean;
                s1[i + 1] = s1[i] + d;
                s2[i + 1] = s2[i] + d * d;
            }
            for (std::size_t i = params.min_leaf; i + params.min_leaf <= n; ++i) {
                const double lo = x(order[i - 1], f);
                const double hi = x(order[i], f);
                if (!(lo < hi)) continue;
                const auto nl = static_cast<double>(i);
                const auto nr = static_cast<double>(n - i);
                const double var_l = std::max(0.0, s2[i] / nl - (s1[i] / nl) * (s1[i] / nl));
                const double sr1 = s1[n] - s1[i];
                const double var_r = std::max(0.0, (s2[n] - s2[i]) / nr - (sr1 / nr) * (sr1 / nr));
                const double sdr = sd - (nl * std::sqrt(var_l) + nr * std::sqrt(var_r)) / static_cast<double>(n);
                if (sdr > best_sdr) {
                    best_sdr = sdr;
                    best_feature = static_cast<int>(f);
                    double mid = lo + (hi - lo) / 2.0;
                    if (!(mid > lo)) mid = hi;
                    best_threshold = mid;
                }
            }
        }
        if (best_feature < 0) {
            rows_of[static_cast<std::size_t>(id)] = std::move(rows);
            return id;
        }

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (std::size_t r : rows) {
            (x(r, static_cast<std::size_t>(best_feature)) < best_threshold ? left : right).push_back(r);
        }
        rows_of[static_cast<std::size_t>(id)] = std::move(rows);
        const int l = grow(std::move(left));
        const int r = grow(std::move(right));
        auto& node = nodes[static_cast<std::size_t>(id)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    /// Mean absolute residual inflated by (n + v)/(n − v) for v parameters.
    double estimated_error(int id) const {
        const auto& node = nodes[static_cast<std::size_t>(id)];
        const auto& rows = rows_of[static_cast<std::size_t>(id)];
        double abs_sum = 0.0;
        for (std::size_t r : rows) abs_sum += std::abs(y[r] - node.model.evaluate(x.row(r)));
        const double n = static_cast<double>(rows.size());
        const double v = static_cast<double>(node.model.parameter_count());
        const double err = abs_sum / n;
        if (n <= v) return 10.0 * err;
        return err * (n + v) / (n - v);
    }

    double prune(int id) {
        auto& node = nodes[static_cast<std::size_t>(id)];
        const double own = estimated_error(id);
        if (node.is_leaf()) return own;
        const int l = node.left;
        const int r = node.right;
        const double el = prune(l);
        const double er = prune(r);
        const double nl = static_cast<double>(nodes[static_cast<std::size_t>(l)].n_samples);
        const double nr = static_cast<double>(nodes[static_cast<std::size_t>(r)].n_samples);
        const double subtree = (nl * el + nr * er) / (nl + nr);
        if (own <= subtree + 1e-10 * root_sd) {
            auto& n = nodes[static_cast<std::size_t>(id)];
            n.feature = -1;
            n.threshold = 0.0;
            n.left = -1;
            n.right = -1;
            return own;
        }
        return subtree;
    }

    /// Drops nodes no longer reachable after pruning, keeping preorder.
    std::vector<ModelTreeNode> compact() const {
        std::vector<ModelTreeNode> out;
        auto emit = [&](auto&& self, int old) -> int {
            const int id = static_cast<int>(out.size());
            out.push_back(nodes[static_cast<std::size_t>(old)]);
            if (!out.back().is_leaf()) {
                const int l = self(self, nodes[static_cast<std::size_t>(old)].left);
                const int r = self(self, nodes[static_cast<std::size_t>(old)].right);
                out[static_cast<std::size_t>(id)].left = l;
                out[static_cast<std::size_t>(id)].right = r;
            }
            return id;
        };
        emit(emit, 0);
        return out;
    }
};

}  // namespace

double LinearModel::evaluate(std::span<const double> x) const {
    double s = intercept;
    for (std::size_t j = 0; j < coefficients.size(); ++j) s += coefficients[j] * x[j];
    return s;
}

std::size_t LinearModel::parameter_count() const {
    return 1 + static_cast<std::size_t>(
                   std::count_if(coefficients.begin(), coefficients.end(), [](double c) { return c != 0.0; }));
}

LinearModel fit_linear(const FeatureMatrix& x, std::span<const double> y, std::span<const std::size_t> rows) {
    LinearModel model;
    model.coefficients.assign(x.cols(), 0.0);
    if (rows.empty()) return model;
    const double y_mean = mean_of(y, rows);
    model.intercept = y_mean;

    // Standardize the varying columns so the rank decision is scale-free.
    std::vector<std::size_t> cols;
    std::vector<double> centre;
    std::vector<double> scale;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double lo = x(rows[0], j);
        double hi = lo;
        double m = 0.0;
        for (std::size_t r : rows) {
            lo = std::min(lo, x(r, j));
            hi = std::max(hi, x(r, j));
            m += x(r, j);
        }
        if (!(hi > lo)) continue;
        m /= static_cast<double>(rows.size());
        double ss = 0.0;
        for (std::size_t r : rows) ss += (x(r, j) - m) * (x(r, j) - m);
        cols.push_back(j);
        centre.push_back(m);
        scale.push_back(std::sqrt(ss / static_cast<double>(rows.size())));
    }
    if (cols.empty()) return model;
    if (rows.size() < cols.size() + 1) {
        model.intercept_only_fallback = true;
        return model;
    }

    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXd a(n, p + 1);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t r = rows[static_cast<std::size_t>(i)];
        a(i, 0) = 1.0;
        for (Eigen::Index k = 0; k < p; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            a(i, k + 1) = (x(r, cols[ku]) - centre[ku]) / scale[ku];
        }
        b(i) = y[r] - y_mean;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < p + 1) {
        model.intercept_only_fallback = true;
        return model;
    }
    const Eigen::VectorXd beta = qr.solve(b);
    if (!beta.allFinite()) {
        model.intercept_only_fallback = true;
        return model;
    }
    double intercept = y_mean + beta(0);
    for (Eigen::Index k = 0; k < p; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        const double c = beta(k + 1) / scale[ku];
        model.coefficients[cols[ku]] = c;
        intercept -= c * centre[ku];
    }
    model.intercept = intercept;
    return model;
}

double ModelTree::predict_unsmoothed(std::span<const double> x) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].model.evaluate(x);
}

double ModelTree::predict(std::span<const double> x) const {
    if (!smoothing) return predict_unsmoothed(x);
    std::vector<int> path = {0};
    while (!nodes[static_cast<std::size_t>(path.back())].is_leaf()) {
        const auto& n = nodes[static_cast<std::size_t>(path.back())];
        path.push_back(x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right);
    }
    double p = nodes[static_cast<std::size_t>(path.back())].model.evaluate(x);
    for (std::size_t k = path.size() - 1; k > 0; --k) {
        const auto& child = nodes[static_cast<std::size_t>(path[k])];
        const auto& parent = nodes[static_cast<std::size_t>(path[k - 1])];
        const double n = static_cast<double>(child.n_samples);
        p = (n * p + smoothing_k * parent.model.evaluate(x)) / (n + smoothing_k);
    }
    return p;
}

std::size_t ModelTree::fallback_count() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const ModelTreeNode& n) {
        return n.model.intercept_only_fallback;
    }));
}

ModelTreeParams ModelTreeParams::from(const RegressorSpec& spec) {
    if (spec.algorithm != Algorithm::kModelTree) throw ConfigError("spec is not a model-tree spec");
    ModelTreeParams p;
    p.min_leaf = static_cast<std::size_t>(spec.get("min_leaf"));
    p.smoothing_k = spec.get("smoothing_k");
    p.smoothing = spec.get("smoothing") != 0.0;
    p.prune = spec.get("prune") != 0.0;
    p.std_fraction = spec.get("std_fraction");
    return p;
}

ModelTree model_tree_fit(const dataset::Dataset& train, const ModelTreeParams& params) {
    if (train.empty()) throw DataError("cannot fit a model tree on an empty dataset");
    const auto x = FeatureMatrix::from(train);
    const auto y = train.labels();
    std::vector<std::size_t> all(y.size());
    std::iota(all.begin(), all.end(), std::size_t{0});

    Builder b{x, y, params, 0.0, {}, {}};
    b.root_sd = population_sd(y, all);
    b.grow(all);
    if (params.prune) b.prune(0);

    ModelTree tree;
    tree.nodes = b.compact();
    tree.min_leaf = params.min_leaf;
    tree.smoothing_k = params.smoothing_k;
    tree.smoothing = params.smoothing;
    tree.feature_schema = train.schema;
    return tree;
}

std::size_t count_leaves(const ModelTree& tree) {
    return static_cast<std::size_t>(
        std::count_if(tree.nodes.begin(), tree.nodes.end(), [](const ModelTreeNode& n) { return n.is_leaf(); }));
}

std::set<std::string> decision_features(const ModelTree& tree) {
    std::set<std::string> out;
    for (const auto& n : tree.nodes) {
        if (!n.is_leaf()) out.insert(tree.feature_schema[static_cast<std::size_t>(n.feature)].name);
    }
    return out;
}

}  // namespace qoe::learners
