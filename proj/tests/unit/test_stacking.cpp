#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "qoe/error.hpp"
#include "qoe/stacking/document.hpp"
#include "qoe/stacking/evaluate.hpp"
#include "qoe/stacking/stacked.hpp"

using namespace qoe;
using namespace qoe::stacking;
using dataset::Dataset;
using learners::Algorithm;
using learners::RegressorModel;
using learners::RegressorSpec;

namespace {

const std::vector<Algorithm> kAll = {Algorithm::kGbt, Algorithm::kMlp, Algorithm::kModelTree};

RegressorSpec quick(Algorithm a, std::uint64_t seed = 1) {
    if (a == Algorithm::kGbt) return RegressorSpec::make(a, {{"n_rounds", 150}, {"learning_rate", 0.05}}, seed);
    if (a == Algorithm::kMlp) return RegressorSpec::make(a, {{"epochs", 40}}, seed);
    return RegressorSpec::make(a, {}, seed);
}

double mos(const std::vector<double>& x) {
    // TI, SI, fps, nstalls, stall total, initial stall, mean rate, trend, last rate
    return 30 + 8 * x[6] - 3 * x[4] - 2 * x[5] + 0.1 * x[0] - 0.05 * x[1] + x[8];
}

Dataset full_rows(gen::Engine& e, std::size_t n) {
    return gen::dataset(e, dataset::qoe_feature_schema(), n, mos, 0.0, 6.0);
}

Dataset generic_rows(gen::Engine& e, std::size_t n) {
    return dataset::project_features(full_rows(e, n), dataset::Projection::kGenericOnly);
}

}  // namespace

TEST_CASE("export copies schema metadata and the algorithm tag") {
    gen::Engine e(31);
    const auto d = generic_rows(e, 60);
    const auto m = learners::fit(quick(Algorithm::kGbt), d);
    const auto doc = export_model(m, true, "unit");
    CHECK(doc.feature_schema.size() == 7);
    CHECK(doc.algorithm == Algorithm::kGbt);
    CHECK(doc.role == DocumentRole::kBase);
    CHECK(doc.format_version == kFormatVersion);
    const auto j = nlohmann::ordered_json::parse(doc.serialize());
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"format_version", "algorithm", "role", "feature_schema", "target_scale",
                                           "params", "provenance"});
    CHECK(j["feature_schema"][0]["name"] == "fps");
    CHECK(j["feature_schema"][0]["kind"] == "generic");
    CHECK(j["target_scale"]["min"] == 0.0);
    CHECK(j["target_scale"]["max"] == 100.0);
}

TEST_CASE("a model with specific features cannot be exported as base") {
    gen::Engine e(32);
    const auto m = learners::fit(quick(Algorithm::kModelTree), full_rows(e, 40));
    try {
        (void)export_model(m, true);
        FAIL("expected refusal");
    } catch (const TransferError& err) {
        const std::string what = err.what();
        CHECK(what.find("TI") != std::string::npos);
        CHECK(what.find("SI") != std::string::npos);
    }
    CHECK_NOTHROW((void)export_model(m, false));
}

TEST_CASE("property: documents round-trip byte for byte and predict identically") {
    gen::Engine e(33);
    for (Algorithm a : kAll) {
        const auto d = full_rows(e, 80);
        const auto m = learners::fit(quick(a, e()), d);
        const auto text = export_model(m, false, "rt").serialize();
        const auto back = import_model(ModelDocument::parse(text));
        CHECK(export_model(back, false, "rt").serialize() == text);
        const auto probe = full_rows(e, 20);
        CHECK(back.predict(probe) == m.predict(probe));
    }
}

TEST_CASE("imported base projects local rows onto its features") {
    gen::Engine e(34);
    const auto full = full_rows(e, 60);
    const auto base = learners::fit(quick(Algorithm::kGbt), dataset::project_features(full, dataset::Projection::kGenericOnly));
    const auto doc = ModelDocument::parse(export_model(base, true).serialize());
    const auto imported = import_model(doc, full.schema);
    CHECK(imported.predict(full) == base.predict(dataset::project_features(full, dataset::Projection::kGenericOnly)));
}

TEST_CASE("import names a base feature missing locally") {
    gen::Engine e(35);
    const auto base = learners::fit(quick(Algorithm::kModelTree), generic_rows(e, 40));
    const auto doc = export_model(base, true);
    auto names = dataset::qoe_feature_schema().generic_projection().entries();
    names.erase(names.begin() + 1);  // drop nstalls
    try {
        (void)import_model(doc, dataset::FeatureSchema(names));
        FAIL("expected incompatibility");
    } catch (const TransferError& err) {
        CHECK(std::string(err.what()).find("nstalls") != std::string::npos);
    }
}

TEST_CASE("malformed documents are rejected") {
    gen::Engine e(36);
    const auto base = learners::fit(quick(Algorithm::kGbt), generic_rows(e, 40));
    auto j = nlohmann::ordered_json::parse(export_model(base, true).serialize());
    auto unknown = j;
    unknown["algorithm"] = "svm";
    CHECK_THROWS_AS(ModelDocument::from_json(unknown), TransferError);
    auto version = j;
    version["format_version"] = 99;
    CHECK_THROWS_AS(import_model(ModelDocument::from_json(version)), TransferError);
    auto leaked = j;
    leaked["feature_schema"][0]["kind"] = "specific";
    CHECK_THROWS_AS(import_model(ModelDocument::from_json(leaked)), TransferError);
    CHECK_THROWS_AS(ModelDocument::parse("{not json"), TransferError);
}

TEST_CASE("document files are written and read back") {
    gen::Engine e(37);
    const auto base = learners::fit(quick(Algorithm::kMlp), generic_rows(e, 40));
    const auto doc = export_model(base, true, "file");
    const auto path = std::filesystem::temp_directory_path() / "qoe_unit_doc.json";
    write_document(path, doc);
    CHECK(read_document(path).serialize() == doc.serialize());
    std::filesystem::remove(path);
}

TEST_CASE("degenerate weights reproduce the constituent models exactly") {
    gen::Engine e(38);
    const auto full = full_rows(e, 100);
    const auto base = learners::fit(quick(Algorithm::kGbt), dataset::project_features(full, dataset::Projection::kGenericOnly));
    const auto local = learners::fit(quick(Algorithm::kModelTree), full);
    const auto probe = full_rows(e, 50);
    const auto bp = predict_projected(base, probe);
    const auto lp = local.predict(probe);
    CHECK(stack_predict(StackedModel(base, local, 0.0), probe) == lp);
    CHECK(stack_predict(StackedModel(base, local, 1.0), probe) == bp);
    CHECK_THROWS_AS(StackedModel(base, local, -0.1), ConfigError);
    CHECK_THROWS_AS(StackedModel(base, local, 1.5), ConfigError);
    const StackedModel s(base, local, 0.3);
    CHECK(s.w0() + s.w1() == 1.0);
}

TEST_CASE("base schema must be a generic subsequence of the local schema") {
    gen::Engine e(39);
    const auto full = full_rows(e, 40);
    const auto a = learners::fit(quick(Algorithm::kModelTree), full);
    CHECK_THROWS_AS(StackedModel(a, a, 0.5), SchemaError);
}

TEST_CASE("property: stacking is affine and stays inside the envelope") {
    gen::Engine e(40);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = gen::between(e, 1, 100);
        std::vector<double> b(n), l(n);
        for (std::size_t i = 0; i < n; ++i) {
            b[i] = gen::uniform(e, -100, 200);
            l[i] = trial % 4 == 0 ? b[i] : gen::uniform(e, -100, 200);
        }
        const double w0 = trial % 10 == 0 ? 0.0 : gen::uniform(e, 0, 1);
        const auto y = combine(b, l, w0);
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(std::abs(y[i] - (l[i] + w0 * (b[i] - l[i]))) < 1e-12 * std::max(1.0, std::abs(y[i])));
            REQUIRE(y[i] >= std::min(b[i], l[i]));
            REQUIRE(y[i] <= std::max(b[i], l[i]));
        }
    }
}

TEST_CASE("weight grid construction") {
    const auto g = weight_grid(0.1);
    REQUIRE(g.size() == 11);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    CHECK(g[3] == 0.3);
    CHECK(weight_grid(0.5) == std::vector<double>{0.0, 0.5, 1.0});
    const auto odd = weight_grid(0.3);
    REQUIRE(odd.size() == 5);
    CHECK(odd.back() == 1.0);
    CHECK_THROWS_AS(weight_grid(0.0), ConfigError);
    CHECK_THROWS_AS(weight_grid(0.6), ConfigError);
}

TEST_CASE("identical base and local give a flat curve") {
    gen::Engine e(41);
    std::vector<double> p(40), y(40);
    for (std::size_t i = 0; i < 40; ++i) {
        y[i] = gen::uniform(e, 0, 100);
        p[i] = y[i] + gen::uniform(e, -10, 10);
    }
    const auto scan = weight_scan(p, p, y, 0.1);
    for (const auto& pt : scan.curve) CHECK(pt.r2 == scan.curve[0].r2);
    CHECK(scan.optimum().w0 == 0.0);
}

TEST_CASE("scan picks the best weight with lowest-w0 ties") {
    const std::vector<double> y{1, 2, 3, 4, 5, 6};
    const std::vector<double> good{1, 2, 3, 4, 5, 6};
    const std::vector<double> noisy{3, 1, 4, 1, 5, 9};
    CHECK(weight_scan(good, noisy, y, 0.1).optimum().w0 == 1.0);
    CHECK(weight_scan(noisy, good, y, 0.1).optimum().w0 == 0.0);
}

TEST_CASE("weight scan runs for all nine algorithm pairs") {
    gen::Engine e(42);
    const auto train_full = full_rows(e, 120);
    const auto test = full_rows(e, 60);
    std::vector<RegressorModel> bases, locals;
    for (Algorithm a : kAll) {
        bases.push_back(learners::fit(quick(a), dataset::project_features(train_full, dataset::Projection::kGenericOnly)));
        locals.push_back(learners::fit(quick(a), train_full));
    }
    for (const auto& b : bases) {
        for (const auto& l : locals) {
            const auto scan = weight_scan(b, l, test, 0.1);
            REQUIRE(scan.curve.size() == 11);
            for (const auto& p : scan.curve) REQUIRE(std::isfinite(p.r2));
        }
    }
}

TEST_CASE("cross evaluation agrees with plain evaluation and marks bad cells") {
    gen::Engine e(43);
    const auto g0 = generic_rows(e, 80);
    const auto g1 = full_rows(e, 40);
    const auto m = learners::fit(quick(Algorithm::kGbt), g0);
    Dataset foreign;
    foreign.schema = gen::schema({"alien"});
    foreign.rows = {{{1.0}, 1.0}, {{2.0}, 3.0}};
    const auto cells = cross_evaluate(m, "G0", {{"G0", g0}, {"G1", g1}, {"X", foreign}});
    REQUIRE(cells.size() == 3);
    const auto own = evaluate(m, g0);
    CHECK(cells[0].result->r2 == own.r2);
    CHECK(cells[0].result->mae == own.mae);
    CHECK_FALSE(cells[0].delta_r2.has_value());
    REQUIRE(cells[1].result.has_value());
    CHECK(*cells[1].delta_r2 == own.r2 - cells[1].result->r2);
    CHECK_FALSE(cells[2].result.has_value());
    CHECK(cells[2].error.find("fps") != std::string::npos);
}
