#include <cmath>
#include <numeric>

#include "doctest.h"
#include "generators.hpp"
#include "oracles.hpp"
#include "qoe/error.hpp"
#include "qoe/learners/regressor.hpp"

using namespace qoe;
using namespace qoe::learners;
using dataset::Dataset;

namespace {

Dataset step_data() {
    Dataset d;
    d.schema = gen::schema({"x"});
    for (int i = 0; i < 20; ++i) d.rows.push_back({{-5.0 + 0.2 * i}, 0.0});
    for (int i = 0; i < 20; ++i) d.rows.push_back({{1.0 + 0.2 * i}, 10.0});
    return d;
}

RegressorSpec quick(Algorithm a, std::uint64_t seed = 1) {
    switch (a) {
        case Algorithm::kGbt:
            return RegressorSpec::make(a, {{"n_rounds", 200}, {"learning_rate", 0.05}}, seed);
        case Algorithm::kMlp:
            return RegressorSpec::make(a, {{"epochs", 60}}, seed);
        case Algorithm::kModelTree:
            return RegressorSpec::make(a, {}, seed);
    }
    return RegressorSpec::make(a);
}

}  // namespace

TEST_CASE("default hyperparameters follow the published configuration") {
    const auto g = RegressorSpec::make(Algorithm::kGbt);
    CHECK(g.get("learning_rate") == 0.004);
    CHECK(g.get("max_depth") == 4);
    CHECK(g.get("subsample") == 0.5);
    CHECK(g.get("colsample_bytree") == 1.0);
    CHECK(g.get("n_rounds") == 2000);
    CHECK(g.get("lambda") == 1.0);
    const auto n = RegressorSpec::make(Algorithm::kMlp);
    CHECK(n.get("hidden1") == 32);
    CHECK(n.get("hidden2") == 64);
    CHECK(n.get("learning_rate") == 0.001);
    CHECK(n.get("dropout") == 0.3);
    CHECK(RegressorSpec::make(Algorithm::kModelTree).get("min_leaf") == 4);
}

TEST_CASE("spec rejects unknown names and out-of-range values") {
    CHECK_THROWS_AS(RegressorSpec::make(Algorithm::kGbt, {{"eta_typo", 0.1}}), ConfigError);
    CHECK_THROWS_AS(RegressorSpec::make(Algorithm::kGbt, {{"max_depth", 0}}), ConfigError);
    CHECK_THROWS_AS(RegressorSpec::make(Algorithm::kGbt, {{"max_depth", 2.5}}), ConfigError);
    CHECK_THROWS_AS(RegressorSpec::make(Algorithm::kMlp, {{"dropout", 1.0}}), ConfigError);
    CHECK_THROWS_AS(algorithm_from_string("svm"), ConfigError);
    CHECK(algorithm_from_string("xgboost") == Algorithm::kGbt);
}

TEST_CASE("constant labels are predicted back") {
    gen::Engine e(2);
    const auto d = gen::dataset(e, gen::schema({"a", "b"}), 64, [](const auto&) { return 42.0; });
    for (Algorithm a : {Algorithm::kGbt, Algorithm::kModelTree}) {
        const auto m = fit(RegressorSpec::make(a, {}, 3), d);
        for (double p : m.predict(d)) REQUIRE(std::abs(p - 42.0) <= 1e-6);
    }
    const auto m = fit(RegressorSpec::make(Algorithm::kMlp, {{"dropout", 0.0}, {"learning_rate", 0.0003}, {"epochs", 5000}}, 3), d);
    for (double p : m.predict(d)) REQUIRE(std::abs(p - 42.0) <= 0.5);
}

TEST_CASE("fit rejects empty data and non-finite labels") {
    Dataset empty;
    empty.schema = gen::schema({"x"});
    for (Algorithm a : {Algorithm::kGbt, Algorithm::kMlp, Algorithm::kModelTree}) {
        CHECK_THROWS_AS(fit(RegressorSpec::make(a), empty), DataError);
    }
    auto bad = step_data();
    bad.rows[3].label = std::nan("");
    CHECK_THROWS_AS(fit(RegressorSpec::make(Algorithm::kGbt), bad), DataError);
}

TEST_CASE("first tree on step data splits inside the gap") {
    const auto d = step_data();
    const auto m = fit(RegressorSpec::make(Algorithm::kGbt, {{"n_rounds", 1}, {"subsample", 1.0}}), d);
    const auto& root = m.gbt()->trees.at(0).nodes.at(0);
    const auto x = d.column(0);
    const auto best = oracle::best_variance_split(x, d.labels());
    REQUIRE_FALSE(root.is_leaf());
    CHECK(root.feature == 0);
    CHECK(root.threshold > best.gap_lo);
    CHECK(root.threshold <= best.gap_hi);
}

TEST_CASE("all-zero gradients give a single zero leaf") {
    gen::Engine e(4);
    const auto d = gen::dataset(e, gen::schema({"a", "b"}), 30, [](const auto& x) { return x[0]; });
    const auto x = FeatureMatrix::from(d);
    std::vector<double> g(30, 0.0), h(30, 1.0);
    std::vector<std::size_t> rows(30), feats{0, 1};
    std::iota(rows.begin(), rows.end(), 0);
    const auto t = gbt_build_tree(g, h, x, rows, feats, {});
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].value == 0.0);
}

TEST_CASE("split gain at lambda 0 equals brute-force variance reduction") {
    gen::Engine e(6);
    for (int trial = 0; trial < 50; ++trial) {
        Dataset d;
        d.schema = gen::schema({"x"});
        const double c0 = gen::uniform(e, -3, 3), c1 = gen::uniform(e, 5, 9);
        for (int i = 0; i < 25; ++i) d.rows.push_back({{gen::uniform(e, 0, 4)}, c0 + gen::uniform(e, -1, 1)});
        for (int i = 0; i < 15; ++i) d.rows.push_back({{gen::uniform(e, 6, 10)}, c1 + gen::uniform(e, -1, 1)});
        const auto y = d.labels();
        const double mean = oracle::mean(y);
        std::vector<double> g(y.size()), h(y.size(), 1.0);
        for (std::size_t i = 0; i < y.size(); ++i) g[i] = mean - y[i];
        const auto x = FeatureMatrix::from(d);
        std::vector<std::size_t> rows(y.size()), feats{0};
        std::iota(rows.begin(), rows.end(), 0);
        TreeBuildParams params;
        params.max_depth = 1;
        params.lambda = 0.0;
        params.min_child_weight = 0.0;
        const auto t = gbt_build_tree(g, h, x, rows, feats, params);
        REQUIRE(t.nodes.size() == 3);
        double gl = 0, hl = 0, gr = 0, hr = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (x(i, 0) < t.nodes[0].threshold) {
                gl += g[i];
                hl += 1;
            } else {
                gr += g[i];
                hr += 1;
            }
        }
        const auto best = oracle::best_variance_split(d.column(0), y);
        REQUIRE(split_gain(gl, hl, gr, hr, 0.0) == doctest::Approx(best.reduction).epsilon(1e-9));
        REQUIRE(t.nodes[0].threshold > best.gap_lo);
        REQUIRE(t.nodes[0].threshold <= best.gap_hi);
    }
}

TEST_CASE("equal gains prefer the lowest feature index") {
    Dataset d;
    d.schema = gen::schema({"a", "b"});
    for (int i = 0; i < 20; ++i) d.rows.push_back({{double(i), double(i)}, i < 10 ? 0.0 : 5.0});
    const auto m = fit(RegressorSpec::make(Algorithm::kGbt, {{"n_rounds", 1}, {"subsample", 1.0}}), d);
    CHECK(m.gbt()->trees[0].nodes[0].feature == 0);
}

TEST_CASE("no tree is deeper than max_depth") {
    gen::Engine e(7);
    const auto d = gen::dataset(e, gen::schema({"a", "b", "c"}), 200,
                                [](const auto& x) { return std::sin(x[0]) * 10 + x[1] * x[2]; });
    for (int depth : {1, 2, 4}) {
        const auto m = fit(RegressorSpec::make(Algorithm::kGbt, {{"n_rounds", 50}, {"max_depth", double(depth)}}), d);
        for (const auto& t : m.gbt()->trees) {
            REQUIRE(t.depth() <= depth);
            for (const auto& n : t.nodes) {
                if (!n.is_leaf()) REQUIRE(n.feature < 3);
                REQUIRE(std::isfinite(n.value));
            }
        }
    }
}

TEST_CASE("GBT with zero trees predicts the base value") {
    gen::Engine e(8);
    const auto d = gen::dataset(e, gen::schema({"a"}), 10, [](const auto& x) { return x[0]; });
    const auto m = fit(RegressorSpec::make(Algorithm::kGbt, {{"n_rounds", 0}}), d);
    CHECK(m.gbt()->trees.empty());
    for (double p : m.predict(d)) CHECK(p == m.gbt()->base_prediction);
    CHECK(m.gbt()->base_prediction == doctest::Approx(oracle::mean(d.labels())));
}

TEST_CASE("depth-1 tree walk by hand") {
    GbtModel g;
    g.base_prediction = 50.0;
    g.learning_rate = 0.1;
    g.max_depth = 1;
    g.feature_schema = gen::schema({"x"});
    g.trees.push_back({{{0, 2.5, 1, 2, 0.0, 10.0}, {-1, 0, -1, -1, -4.0, 6.0}, {-1, 0, -1, -1, 8.0, 4.0}}});
    const std::vector<double> below{1.0}, above{3.0};
    CHECK(g.predict(below) == 50.0 + 0.1 * -4.0);
    CHECK(g.predict(above) == 50.0 + 0.1 * 8.0);
}

TEST_CASE("property: GBT prediction decomposes exactly over trees") {
    gen::Engine e(9);
    const auto d = gen::dataset(e, gen::schema({"a", "b"}), 120, [](const auto& x) { return x[0] * x[1]; });
    const auto m = fit(RegressorSpec::make(Algorithm::kGbt, {{"n_rounds", 80}}), d);
    const auto& g = *m.gbt();
    const auto pred = m.predict(d);
    for (std::size_t i = 0; i < d.size(); ++i) {
        double y = g.base_prediction;
        for (const auto& t : g.trees) {
            int n = 0;
            while (!t.nodes[n].is_leaf()) {
                n = d.rows[i].values[t.nodes[n].feature] < t.nodes[n].threshold ? t.nodes[n].left : t.nodes[n].right;
            }
            y += g.learning_rate * t.nodes[n].value;
        }
        REQUIRE(pred[i] == y);
    }
}

TEST_CASE("property: train RMSE never rises without subsampling") {
    gen::Engine e(10);
    for (int trial = 0; trial < 5; ++trial) {
        const auto d = gen::dataset(e, gen::schema({"a", "b", "c"}), 150, [&](const auto& x) {
            return 20 * std::sin(x[0]) + x[1] * x[1] - 3 * x[2];
        });
        GbtParams p;
        p.n_rounds = 300;
        p.learning_rate = 0.05;
        p.subsample = 1.0;
        std::vector<double> history;
        fit_gbt(d, p, e(), &history);
        REQUIRE(history.size() == 300);
        for (std::size_t r = 1; r < history.size(); ++r) REQUIRE(history[r] <= history[r - 1] * (1 + 1e-12));
    }
}

TEST_CASE("property: training is bit-identical for a fixed seed") {
    gen::Engine e(11);
    const auto d = gen::dataset(e, gen::schema({"a", "b"}), 80, [](const auto& x) { return x[0] + 2 * x[1]; });
    for (Algorithm a : {Algorithm::kGbt, Algorithm::kMlp, Algorithm::kModelTree}) {
        const auto m1 = fit(quick(a, 77), d);
        const auto m2 = fit(quick(a, 77), d);
        CHECK(m1.impl() == m2.impl());
        CHECK(m1.predict(d) == m2.predict(d));
    }
    CHECK_FALSE(fit(quick(Algorithm::kGbt, 1), d).impl() == fit(quick(Algorithm::kGbt, 2), d).impl());
}

TEST_CASE("predict reports mismatched feature names") {
    gen::Engine e(12);
    const auto d = gen::dataset(e, gen::schema({"a", "b"}), 30, [](const auto& x) { return x[0]; });
    const auto m = fit(quick(Algorithm::kModelTree), d);
    auto other = d;
    other.schema = gen::schema({"a", "zeta"});
    try {
        (void)m.predict(other);
        FAIL("expected a schema error");
    } catch (const SchemaError& err) {
        const std::string what = err.what();
        CHECK(what.find("b") != std::string::npos);
        CHECK(what.find("zeta") != std::string::npos);
    }
}

TEST_CASE("every algorithm fits and predicts through one contract") {
    gen::Engine e(13);
    const auto d = gen::dataset(e, gen::schema({"a", "b", "c"}), 90, [](const auto& x) { return 3 * x[0] - x[1]; });
    for (Algorithm a : {Algorithm::kGbt, Algorithm::kMlp, Algorithm::kModelTree}) {
        const auto m = fit(quick(a), d);
        CHECK(m.algorithm() == a);
        CHECK(m.feature_schema() == d.schema);
        const auto p = m.predict(d);
        REQUIRE(p.size() == d.size());
        for (double v : p) REQUIRE(std::isfinite(v));
    }
}

TEST_CASE("binding to a wider schema projects rows") {
    gen::Engine e(14);
    const auto d = gen::dataset(e, gen::schema({"a", "b"}), 40, [](const auto& x) { return x[0] - x[1]; });
    const auto m = fit(quick(Algorithm::kGbt), d);
    const auto wide_schema = gen::schema({"TI", "b", "a"}, {"TI"});
    Dataset wide;
    wide.schema = wide_schema;
    for (const auto& r : d.rows) wide.rows.push_back({{7.0, r.values[1], r.values[0]}, r.label});
    const auto bound = m.bind_input(wide_schema);
    CHECK(bound.predict(wide) == m.predict(d));
    CHECK_THROWS_AS((void)m.bind_input(gen::schema({"a", "c"})), TransferError);
}

TEST_CASE("zero learning rate freezes the network") {
    gen::Engine e(15);
    const auto d = gen::dataset(e, gen::schema({"a", "b"}), 50, [](const auto& x) { return x[0]; });
    const auto x = FeatureMatrix::from(d);
    auto model = mlp_init({2, 8, 8, 1}, 3);
    fit_normalization(model, x);
    const auto z = standardize(model, x);
    std::vector<double> t = d.labels();
    for (auto& v : t) v /= 100.0;
    MlpTrainer trainer(model, 0.0, 0.3, 16, 5);
    const double first = trainer.train_epoch(z, t);
    for (int i = 0; i < 5; ++i) CHECK(trainer.train_epoch(z, t) == first);
    CHECK(trainer.model().parameters == model.parameters);
}

TEST_CASE("MLP learns a linear target") {
    gen::Engine e(16);
    const auto d = gen::dataset(e, gen::schema({"x"}), 200, [](const auto& x) { return 3 * x[0]; });
    MlpParams p;
    p.epochs = 300;
    p.dropout = 0.0;
    std::vector<double> history;
    fit_mlp(d, p, 4, &history);
    CHECK(history.back() < 0.1);
    CHECK(history.back() < history.front());
}

TEST_CASE("non-finite loss raises a divergence error with the epoch") {
    Dataset d;
    d.schema = gen::schema({"x"});
    for (int i = 0; i < 8; ++i) d.rows.push_back({{double(i)}, 0.0});
    const auto x = FeatureMatrix::from(d);
    auto model = mlp_init({1, 4, 4, 1}, 1);
    fit_normalization(model, x);
    std::vector<double> t(8, 1e300);
    MlpTrainer trainer(model, 0.001, 0.0, 4, 1);
    try {
        trainer.train_epoch(standardize(model, x), t);
        FAIL("expected divergence");
    } catch (const DivergenceError& err) {
        CHECK(err.epoch() == 1);
        CHECK(err.learning_rate() == 0.001);
    }
}

TEST_CASE("property: backprop matches central finite differences") {
    gen::Engine e(17);
    std::size_t checked = 0, skipped = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t in = gen::between(e, 1, 4), h1 = gen::between(e, 2, 6), h2 = gen::between(e, 2, 6);
        auto model = mlp_init({in, h1, h2, 1}, e());
        for (auto& w : model.parameters) w += gen::uniform(e, -0.2, 0.2);  // non-zero biases too
        FeatureMatrix z(3, in);
        std::vector<double> t(3);
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < in; ++j) z(i, j) = gen::uniform(e, -2, 2);
            t[i] = gen::uniform(e, -1, 1);
        }
        const std::vector<std::size_t> batch{0, 1, 2};
        std::vector<double> mask(3 * (h1 + h2));
        for (auto& m : mask) m = gen::between(e, 0, 3) == 0 ? 0.0 : 1.0 / 0.7;

        const auto analytic = mlp_loss_gradient(model, z, t, batch, mask);
        const double h = 1e-3;
        for (std::size_t k = 0; k < model.parameters.size(); ++k) {
            auto plus = model, minus = model;
            plus.parameters[k] += h;
            minus.parameters[k] -= h;
            bool kink = false;
            for (std::size_t i = 0; i < 3 && !kink; ++i) {
                const auto base = oracle::relu_pattern(model, z.row(i));
                kink = oracle::relu_pattern(plus, z.row(i)) != base || oracle::relu_pattern(minus, z.row(i)) != base;
            }
            if (kink) {
                ++skipped;
                continue;
            }
            const double numeric = (mlp_loss(plus, z, t, batch, mask) - mlp_loss(minus, z, t, batch, mask)) / (2 * h);
            const double a = analytic.gradient[k];
            const double scale = std::max(std::abs(a), std::abs(numeric));
            if (scale < 1e-10) {
                REQUIRE(std::abs(a - numeric) < 1e-10);
            } else {
                REQUIRE(std::abs(a - numeric) / scale < 1e-4);
            }
            ++checked;
        }
    }
    CHECK(checked > 10 * skipped);
}

TEST_CASE("model tree on six rows is a single global linear model") {
    Dataset d;
    d.schema = gen::schema({"x"});
    for (int i = 0; i < 6; ++i) d.rows.push_back({{double(i)}, 2.0 * i + 1 + (i % 2 ? 0.1 : -0.1)});
    const auto t = model_tree_fit(d, ModelTreeParams{});
    CHECK(count_leaves(t) == 1);
    CHECK(decision_features(t).empty());
}

TEST_CASE("single-leaf model tree evaluates beta.x + b exactly") {
    ModelTree t;
    t.feature_schema = gen::schema({"a", "b"});
    ModelTreeNode leaf;
    leaf.n_samples = 10;
    leaf.model.coefficients = {1.5, -2.0};
    leaf.model.intercept = 0.25;
    t.nodes.push_back(leaf);
    const std::vector<double> x{2.0, 3.0};
    CHECK(t.predict(x) == 0.25 + 1.5 * 2.0 + -2.0 * 3.0);
}

TEST_CASE("two-segment fixture recovers both slopes") {
    Dataset d;
    d.schema = gen::schema({"x"});
    for (int i = 0; i < 200; ++i) {
        const double x = -5.0 + 10.0 * (i + 0.5) / 200.0;
        d.rows.push_back({{x}, x < 0 ? x : -x + 10});
    }
    const auto t = model_tree_fit(d, ModelTreeParams{});
    REQUIRE(count_leaves(t) == 2);
    CHECK(decision_features(t) == std::set<std::string>{"x"});
    std::vector<double> slopes;
    for (const auto& n : t.nodes) {
        if (n.is_leaf()) slopes.push_back(n.model.coefficients.at(0));
    }
    std::sort(slopes.begin(), slopes.end());
    CHECK(std::abs(slopes[0] - -1.0) < 0.05);
    CHECK(std::abs(slopes[1] - 1.0) < 0.05);
}

TEST_CASE("property: a single-leaf fit satisfies the normal equations") {
    gen::Engine e(18);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t p = gen::between(e, 1, 4);
        const std::size_t n = gen::between(e, p + 2, 40);
        std::vector<std::string> names;
        for (std::size_t j = 0; j < p; ++j) names.push_back("f" + std::to_string(j));
        const auto d = gen::dataset(e, gen::schema(names), n, [&](const auto& x) {
            double y = 3.0;
            for (double v : x) y += v * v - 2 * v;
            return y + gen::uniform(e, -1, 1);
        });
        ModelTreeParams params;
        params.min_leaf = n;
        const auto t = model_tree_fit(d, params);
        REQUIRE(count_leaves(t) == 1);
        REQUIRE_FALSE(t.nodes[0].model.intercept_only_fallback);
        double sum_r = 0.0;
        std::vector<double> dots(p, 0.0);
        for (const auto& row : d.rows) {
            const double r = row.label - t.predict(row.values);
            sum_r += r;
            for (std::size_t j = 0; j < p; ++j) dots[j] += r * row.values[j];
        }
        REQUIRE(std::abs(sum_r) < 1e-8);
        for (double v : dots) REQUIRE(std::abs(v) < 1e-8);
    }
}

TEST_CASE("property: no leaf holds fewer than min_leaf rows") {
    gen::Engine e(19);
    for (int trial = 0; trial < 30; ++trial) {
        const double min_leaf = static_cast<double>(gen::between(e, 1, 10));
        const auto d = gen::dataset(e, gen::schema({"a", "b"}), gen::between(e, 5, 150), [&](const auto& x) {
            return (x[0] < 5 ? 10 * x[1] : -x[1]) + gen::uniform(e, -0.5, 0.5);
        });
        const auto m = fit(RegressorSpec::make(Algorithm::kModelTree, {{"min_leaf", min_leaf}}), d);
        const auto& t = *m.model_tree();
        std::size_t leaf_rows = 0;
        for (const auto& n : t.nodes) {
            if (!n.is_leaf()) continue;
            REQUIRE(static_cast<double>(n.n_samples) >= std::min<double>(min_leaf, d.size()));
            leaf_rows += n.n_samples;
            for (double c : n.model.coefficients) REQUIRE(std::isfinite(c));
        }
        REQUIRE(leaf_rows == d.size());
    }
}

TEST_CASE("singular leaf regression falls back to the mean") {
    Dataset d;
    d.schema = gen::schema({"a", "b"});
    for (int i = 0; i < 8; ++i) d.rows.push_back({{double(i), 2.0 * i}, double(i % 3)});
    ModelTreeParams params;
    params.min_leaf = 8;
    const auto t = model_tree_fit(d, params);
    REQUIRE(count_leaves(t) == 1);
    CHECK(t.nodes[0].model.intercept_only_fallback);
    CHECK(t.fallback_count() == 1);
    CHECK(t.predict(d.rows[0].values) == doctest::Approx(oracle::mean(d.labels())));
}
