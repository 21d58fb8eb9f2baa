#pragma once

// Independent reference computations used only by tests. Each one is written
// from the textbook definition, without sharing code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "qoe/learners/gbt.hpp"
#include "qoe/learners/mlp.hpp"

namespace oracle {

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

/// Sample standard deviation (n − 1 denominator).
inline double sample_sd(const std::vector<double>& v) {
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Closed-form OLS slope against index 0..n−1.
inline double ols_slope(const std::vector<double>& y) {
    const double n = static_cast<double>(y.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double x = static_cast<double>(i);
        sx += x;
        sy += y[i];
        sxx += x * x;
        sxy += x * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline double sse(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s;
}

struct BestSplit {
    double reduction = -1.0;
    double gap_lo = 0.0;  ///< largest value going left
    double gap_hi = 0.0;  ///< smallest value going right
};

/// Exhaustive search over every cut between consecutive distinct values of
/// a single feature, scoring the drop in summed squared error.
inline BestSplit best_variance_split(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> cuts(x);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const double total = sse(y);
    BestSplit best;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
        std::vector<double> left, right;
        for (std::size_t i = 0; i < x.size(); ++i) (x[i] <= cuts[c] ? left : right).push_back(y[i]);
        const double red = total - sse(left) - sse(right);
        if (red > best.reduction) best = {red, cuts[c], cuts[c + 1]};
    }
    return best;
}

/// sup_t |F_a(t) − F_b(t)| evaluated at every sample point by counting.
inline double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    auto ecdf = [](const std::vector<double>& s, double t) {
        std::size_t c = 0;
        for (double v : s) c += v <= t ? 1 : 0;
        return static_cast<double>(c) / static_cast<double>(s.size());
    };
    for (const auto* s : {&a, &b}) {
        for (double t : *s) d = std::max(d, std::abs(ecdf(a, t) - ecdf(b, t)));
    }
    return d;
}

/// Path-dependent conditional expectation of one tree given the features in
/// `mask`: known features follow x, unknown ones average children by cover.
inline double tree_conditional(const qoe::learners::DecisionTree& tree, const std::vector<double>& x,
                               std::uint32_t mask, int node = 0) {
    const auto& n = tree.nodes[static_cast<std::size_t>(node)];
    if (n.is_leaf()) return n.value;
    if (mask & (1u << n.feature)) {
        return tree_conditional(tree, x, mask, x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right);
    }
    const auto& l = tree.nodes[static_cast<std::size_t>(n.left)];
    const auto& r = tree.nodes[static_cast<std::size_t>(n.right)];
    return (l.cover * tree_conditional(tree, x, mask, n.left) + r.cover * tree_conditional(tree, x, mask, n.right)) /
           (l.cover + r.cover);
}

/// Shapley values by enumerating all 2^M coalitions.
inline std::vector<double> shapley(std::size_t m, const std::function<double(std::uint32_t)>& value) {
    std::vector<double> fact(m + 1, 1.0);
    for (std::size_t i = 1; i <= m; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
    std::vector<double> phi(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::uint32_t s = 0; s < (1u << m); ++s) {
            if (s & (1u << j)) continue;
            const auto size = static_cast<std::size_t>(__builtin_popcount(s));
            const double w = fact[size] * fact[m - size - 1] / fact[m];
            phi[j] += w * (value(s | (1u << j)) - value(s));
        }
    }
    return phi;
}

/// ReLU activation pattern of every hidden unit.
inline std::vector<bool> relu_pattern(const qoe::learners::MlpModel& m, std::span<const double> z) {
    std::vector<bool> pattern;
    std::vector<double> a(z.begin(), z.end());
    for (std::size_t l = 0; l + 1 < m.layer_count(); ++l) {
        const std::size_t in = m.layer_sizes[l];
        const std::size_t out = m.layer_sizes[l + 1];
        std::vector<double> next(out);
        for (std::size_t o = 0; o < out; ++o) {
            double s = m.parameters[m.bias_offset(l) + o];
            for (std::size_t i = 0; i < in; ++i) s += m.parameters[m.weight_offset(l) + o * in + i] * a[i];
            pattern.push_back(s > 0);
            next[o] = std::max(0.0, s);
        }
        a = std::move(next);
    }
    return pattern;
}

}  // namespace oracle
