#include "qoe/analysis/shap.hpp"

#include <algorithm>
#include <cmath>

#include "qoe/error.hpp"

namespace qoe::analysis {
namespace {

struct PathElement {
    int feature = -1;
    double zero_fraction = 0.0;
    double one_fraction = 0.0;
    double pweight = 0.0;
};

using Path = std::vector<PathElement>;

void extend_path(Path& path, std::size_t depth, double zero_fraction, double one_fraction, int feature) {
    path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
    const auto d1 = static_cast<double>(depth + 1);
    for (std::size_t i = depth; i-- > 0;) {
        path[i + 1].pweight += one_fraction * path[i].pweight * static_cast<double>(i + 1) / d1;
        path[i].pweight = zero_fraction * path[i].pweight * static_cast<double>(depth - i) / d1;
    }
}

void unwind_path(Path& path, std::size_t depth, std::size_t index) {
    const double one = path[index].one_fraction;
    const double zero = path[index].zero_fraction;
    const auto d1 = static_cast<double>(depth + 1);
    double next_one_portion = path[depth].pweight;
    for (std::size_t i = depth; i-- > 0;) {
        if (one != 0.0) {
            const double tmp = path[i].pweight;
            path[i].pweight = next_one_portion * d1 / (static_cast<double>(i + 1) * one);
            next_one_portion = tmp - path[i].pweight * zero * static_cast<double>(depth - i) / d1;
        } else {
            path[i].pweight = path[i].pweight * d1 / (zero * static_cast<double>(depth - i));
        }
    }
    for (std::size_t i = index; i < depth; ++i) {
        path[i].feature = path[i + 1].feature;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
}

/// Sum of the path weights with element `index` removed.
double unwound_path_sum(const Path& path, std::size_t depth, std::size_t index) {
    const double one = path[index].one_fraction;
    const double zero = path[index].zero_fraction;
    double next_one_portion = path[depth].pweight;
    double total = 0.0;
    if (one != 0.0) {
        for (std::size_t i = depth; i-- > 0;) {
            const double tmp = next_one_portion / (static_cast<double>(i + 1) * one);
            total += tmp;
            next_one_portion = path[i].pweight - tmp * zero * static_cast<double>(depth - i);
        }
    } else {
        for (std::size_t i = depth; i-- > 0;) {
            total += path[i].pweight / (zero * static_cast<double>(depth - i));
        }
    }
    return total * static_cast<double>(depth + 1);
}

void recurse(const learners::DecisionTree& tree, std::span<const double> x, double scale, std::span<double> phi,
             int node_index, Path path, std::size_t depth, double parent_zero, double parent_one,
             int parent_feature) {
    if (path.size() < depth + 1) path.resize(depth + 1);
    extend_path(path, depth, parent_zero, parent_one, parent_feature);
    const auto& node = tree.nodes[static_cast<std::size_t>(node_index)];

    if (node.is_leaf()) {
        for (std::size_t i = 1; i <= depth; ++i) {
            const double w = unwound_path_sum(path, depth, i);
            const auto& el = path[i];
            phi[static_cast<std::size_t>(el.feature)] +=
                w * (el.one_fraction - el.zero_fraction) * node.value * scale;
        }
        return;
    }

    const bool go_left = x[static_cast<std::size_t>(node.feature)] < node.threshold;
    const int hot = go_left ? node.left : node.right;
    const int cold = go_left ? node.right : node.left;
    const double cover = node.cover;
    const double hot_zero = tree.nodes[static_cast<std::size_t>(hot)].cover / cover;
    const double cold_zero = tree.nodes[static_cast<std::size_t>(cold)].cover / cover;
    double incoming_zero = 1.0;
    double incoming_one = 1.0;

    // A feature seen earlier on the path is unwound and re-added here.
    std::size_t k = 0;
    for (; k <= depth; ++k) {
        if (path[k].feature == node.feature) break;
    }
    if (k != depth + 1) {
        incoming_zero = path[k].zero_fraction;
        incoming_one = path[k].one_fraction;
        unwind_path(path, depth, k);
        --depth;
    }
    recurse(tree, x, scale, phi, hot, path, depth + 1, hot_zero * incoming_zero, incoming_one, node.feature);
    recurse(tree, x, scale, phi, cold, path, depth + 1, cold_zero * incoming_zero, 0.0, node.feature);
}

}  // namespace

void tree_shap_single(const learners::DecisionTree& tree, std::span<const double> x, double scale,
                      std::span<double> phi) {
    if (tree.nodes.empty()) return;
    recurse(tree, x, scale, phi, 0, Path(8), 0, 1.0, 1.0, -1);
}

double expected_value(const learners::DecisionTree& tree) {
    if (tree.nodes.empty()) return 0.0;
    const double root_cover = tree.nodes[0].cover;
    if (!(root_cover > 0.0)) return tree.nodes[0].is_leaf() ? tree.nodes[0].value : 0.0;
    double s = 0.0;
    for (const auto& n : tree.nodes) {
        if (n.is_leaf()) s += n.value * n.cover;
    }
    return s / root_cover;
}

ShapReport tree_shap(const learners::GbtModel& model, const dataset::Dataset& rows) {
    if (rows.schema.names() != model.feature_schema.names()) {
        throw SchemaError("TreeSHAP rows do not match the model schema");
    }
    ShapReport report;
    report.features = model.feature_schema.names();
    double expectation = 0.0;
    for (const auto& t : model.trees) expectation += model.learning_rate * expected_value(t);
    report.base_value = model.base_prediction + expectation;

    const std::size_t p = report.features.size();
    report.phi.reserve(rows.size());
    for (const auto& r : rows.rows) {
        std::vector<double> phi(p, 0.0);
        for (const auto& t : model.trees) tree_shap_single(t, r.values, model.learning_rate, phi);
        report.phi.push_back(std::move(phi));
        report.values.push_back(r.values);
        report.predictions.push_back(model.predict(r.values));
    }
    return report;
}

ShapReport tree_shap(const learners::RegressorModel& model, const dataset::Dataset& rows) {
    const auto* gbt = model.gbt();
    if (!gbt) {
        throw UnsupportedModelError("TreeSHAP is only defined for GBT models, not " +
                                    std::string(learners::to_string(model.algorithm())));
    }
    if (rows.schema.names() == gbt->feature_schema.names()) return tree_shap(*gbt, rows);
    return tree_shap(*gbt, dataset::select_columns(rows, gbt->feature_schema));
}

std::vector<ShapSummaryRow> shap_summary(const ShapReport& report) {
    const std::size_t p = report.features.size();
    const std::size_t n = report.phi.size();
    std::vector<ShapSummaryRow> out;
    for (std::size_t j = 0; j < p; ++j) {
        ShapSummaryRow row{report.features[j], 0.0, 0};
        if (n == 0) {
            out.push_back(row);
            continue;
        }
        double mv = 0.0;
        double mp = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            row.mean_abs_phi += std::abs(report.phi[i][j]);
            mv += report.values[i][j];
            mp += report.phi[i][j];
        }
        row.mean_abs_phi /= static_cast<double>(n);
        mv /= static_cast<double>(n);
        mp /= static_cast<double>(n);
        double svp = 0.0;
        double svv = 0.0;
        double spp = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dv = report.values[i][j] - mv;
            const double dp = report.phi[i][j] - mp;
            svp += dv * dp;
            svv += dv * dv;
            spp += dp * dp;
        }
        if (svv > 0.0 && spp > 0.0 && svp != 0.0) row.sign = svp > 0.0 ? 1 : -1;
        out.push_back(row);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ShapSummaryRow& a, const ShapSummaryRow& b) { return a.mean_abs_phi > b.mean_abs_phi; });
    return out;
}

}  // namespace qoe::analysis
