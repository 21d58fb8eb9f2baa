#include "qoe/cli/run.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "qoe/analysis/ks.hpp"
#include "qoe/analysis/protocol.hpp"
#include "qoe/analysis/shap.hpp"
#include "qoe/cli/report_io.hpp"
#include "qoe/error.hpp"
#include "qoe/random.hpp"
#include "qoe/stacking/document.hpp"
#include "qoe/stacking/evaluate.hpp"
#include "qoe/stacking/stacked.hpp"

namespace qoe::cli {
namespace {

using json = nlohmann::ordered_json;
using dataset::Dataset;
using dataset::Projection;
using learners::Algorithm;
using learners::RegressorModel;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class F>
auto stage(const std::string& name, F&& body) {
    try {
        return body();
    } catch (...) {
        std::throw_with_nested(Error("stage '" + name + "' failed"));
    }
}

std::string algo(Algorithm a) { return std::string(learners::to_string(a)); }

std::string pair_name(const AlgorithmPair& p) { return algo(p.first) + ":" + algo(p.second); }

std::size_t algo_index(Algorithm a) { return static_cast<std::size_t>(a); }

struct Score {
    double r2 = 0.0;
    double mae = 0.0;
};

struct SeedEntry {
    std::string stage;
    std::uint64_t seed;
};

struct RepOutcome {
    std::vector<SeedEntry> seeds;
    Score t3_gf, t3_all;
    std::array<std::array<Score, 3>, 2> t4{};  // [random, content][overall, G0, G1]
    std::array<std::array<Score, 2>, 4> t5{};  // [M0 GF, M0 all, M1 GF, M1 all][G0 test, G1 test]
    std::array<double, 4> t5_delta{};
    std::vector<std::vector<Score>> scans;  // per pair, per grid point
    json checks;
    std::vector<std::string> documents;  // base, local (first repetition only)
};

struct Summary {
    double mean = kNaN;
    double ci = kNaN;
};

Summary summarize(const std::vector<double>& values) {
    if (values.size() == 1) return {values[0], kNaN};
    const auto r = analysis::summarize(analysis::Metric::kR2, values);
    return {r.mean, r.ci_half_width};
}

json num(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

json summary_json(const Summary& s) { return {{"mean", num(s.mean)}, {"ci_half_width", num(s.ci)}}; }

Score score(const RegressorModel& m, const Dataset& test, analysis::RSquared mode) {
    const auto e = stacking::evaluate(m, test, mode);
    return {e.r2, e.mae};
}

Score pooled(const std::vector<double>& truth, const std::vector<double>& pred, analysis::RSquared mode) {
    return {analysis::r_squared(truth, pred, mode), analysis::mae(truth, pred)};
}

class Experiment {
  public:
    Experiment(const ExperimentConfig& cfg, Dataset data, dataset::Split content, std::size_t random_g0)
        : cfg_(cfg), data_(std::move(data)), content_(std::move(content)), random_g0_(random_g0) {
        grid_ = stacking::weight_grid(cfg.stacking.grid_step);
    }

    const std::vector<double>& grid() const { return grid_; }

    RepOutcome run(std::size_t rep, std::uint64_t s) const {
        RepOutcome out;
        auto seed = [&](const std::string& name, std::uint64_t stream) {
            const auto v = derive_seed(s, stream);
            out.seeds.push_back({name, v});
            return v;
        };
        auto fit = [&](Algorithm a, const Dataset& train, const std::string& name, std::uint64_t stream) {
            return learners::fit(cfg_.spec_for(a, seed(name, stream)), train);
        };
        const auto mode = cfg_.analysis.r2;
        const Algorithm primary = cfg_.primary_algorithm;

        // table3: full data with and without content features.
        {
            const auto tt = dataset::train_test_split(data_, cfg_.train_fraction, seed("table3.train_test_split", 1));
            const auto m_all = fit(primary, tt.train, "table3.fit_all", 2);
            const auto m_gf =
                fit(primary, dataset::project_features(tt.train, Projection::kGenericOnly), "table3.fit_generic", 3);
            out.t3_all = score(m_all, tt.test, mode);
            out.t3_gf = score(m_gf, tt.test, mode);
        }

        // table4: random and content splits, one model per group.
        const auto random = dataset::random_split(data_, random_g0_, seed("table4.random_split", 4));
        std::array<std::array<dataset::TrainTest, 2>, 2> tts;
        for (std::size_t k = 0; k < 2; ++k) {
            const dataset::Split& split = k == 0 ? random : content_;
            std::vector<double> truth, pred;
            for (std::size_t g = 0; g < 2; ++g) {
                const std::string tag = std::string(k == 0 ? "random" : "content") + ".G" + std::to_string(g);
                tts[k][g] = dataset::train_test_split(g == 0 ? split.g0 : split.g1, cfg_.train_fraction,
                                                      seed("table4." + tag + ".train_test_split", 10 + 2 * k + g));
                const auto m = fit(primary, tts[k][g].train, "table4." + tag + ".fit", 20 + 2 * k + g);
                const auto p = stacking::predict_projected(m, tts[k][g].test);
                const auto y = tts[k][g].test.labels();
                out.t4[k][g + 1] = pooled(y, p, mode);
                truth.insert(truth.end(), y.begin(), y.end());
                pred.insert(pred.end(), p.begin(), p.end());
            }
            out.t4[k][0] = pooled(truth, pred, mode);
        }

        // table5: cross-group performance on the configured split.
        const std::size_t kc = cfg_.split.mode == SplitMode::kContent ? 1 : 0;
        const auto& tt0 = tts[kc][0];
        const auto& tt1 = tts[kc][1];
        const std::vector<stacking::NamedDataset> tests = {{"G0", tt0.test}, {"G1", tt1.test}};
        {
            const std::array<const Dataset*, 2> trains = {&tt0.train, &tt1.train};
            for (std::size_t m = 0; m < 4; ++m) {
                const std::size_t g = m / 2;
                const bool all = m % 2 == 1;
                const std::string group = "G" + std::to_string(g);
                const auto train = all ? *trains[g] : dataset::project_features(*trains[g], Projection::kGenericOnly);
                const auto model = fit(primary, train, "table5.M" + std::to_string(g) + (all ? ".all" : ".generic"),
                                       30 + m);
                const auto cells = stacking::cross_evaluate(model, group, tests, mode);
                for (std::size_t t = 0; t < 2; ++t) {
                    if (!cells[t].result) throw DataError(cells[t].error);
                    out.t5[m][t] = {cells[t].result->r2, cells[t].result->mae};
                    if (cells[t].delta_r2) out.t5_delta[m] = *cells[t].delta_r2;
                }
            }
        }

        // table6: transfer the base models, stack with the local ones, scan w0.
        std::array<std::optional<RegressorModel>, 3> bases, locals;
        std::array<std::string, 3> base_docs;
        const auto base_train = dataset::project_features(tt0.train, cfg_.base.projection);
        const auto local_train = dataset::project_features(tt1.train, cfg_.local.projection);
        for (const auto& [b, l] : cfg_.stacking.pairs) {
            if (!bases[algo_index(b)]) {
                const auto trained = fit(b, base_train, "table6.base." + algo(b), 40 + algo_index(b));
                const auto doc = stacking::export_model(trained, true, "G0 train split, repetition " + std::to_string(rep));
                base_docs[algo_index(b)] = doc.serialize();
                auto imported = stacking::import_model(stacking::ModelDocument::parse(base_docs[algo_index(b)]),
                                                       tt1.test.schema);
                if (rep == 0) {
                    const bool exact = stacking::predict_projected(imported, tt1.test) ==
                                       stacking::predict_projected(trained, tt1.test);
                    out.checks["transfer_exact"][algo(b)] = exact;
                }
                bases[algo_index(b)] = std::move(imported);
            }
            if (!locals[algo_index(l)]) {
                locals[algo_index(l)] = fit(l, local_train, "table6.local." + algo(l), 50 + algo_index(l));
            }
        }
        const auto truth = tt1.test.labels();
        for (const auto& pair : cfg_.stacking.pairs) {
            const auto& base = *bases[algo_index(pair.first)];
            const auto& local = *locals[algo_index(pair.second)];
            const auto bp = stacking::predict_projected(base, tt1.test);
            const auto lp = stacking::predict_projected(local, tt1.test);
            const auto scan = stacking::weight_scan(bp, lp, truth, cfg_.stacking.grid_step, mode);
            std::vector<Score> curve;
            for (const auto& point : scan.curve) curve.push_back({point.r2, point.mae});
            out.scans.push_back(std::move(curve));
            if (rep == 0) out.checks["stacking"][pair_name(pair)] = identity_checks(base, local, tt1.test, bp, lp);
        }
        if (rep == 0) {
            out.documents.push_back(base_docs[algo_index(cfg_.base.algorithm)]);
            out.documents.push_back(
                stacking::export_model(*locals[algo_index(cfg_.local.algorithm)], false, "G1 train split, repetition 0")
                    .serialize());
        }
        return out;
    }

  private:
    json identity_checks(const RegressorModel& base, const RegressorModel& local, const Dataset& rows,
                         const std::vector<double>& bp, const std::vector<double>& lp) const {
        double affine = 0.0;
        std::size_t envelope_violations = 0;
        bool w0_zero = false, w0_one = false;
        for (double w0 : grid_) {
            const stacking::StackedModel stacked(base, local, w0);
            const auto y = stacking::stack_predict(stacked, rows);
            if (w0 == 0.0) w0_zero = y == lp;
            if (w0 == 1.0) w0_one = y == bp;
            for (std::size_t i = 0; i < y.size(); ++i) {
                affine = std::max(affine, std::abs(y[i] - (lp[i] + w0 * (bp[i] - lp[i]))));
                const double lo = std::min(bp[i], lp[i]);
                const double hi = std::max(bp[i], lp[i]);
                if (y[i] < lo || y[i] > hi) ++envelope_violations;
            }
        }
        return {{"w0_zero_equals_local", w0_zero},
                {"w0_one_equals_base", w0_one},
                {"max_affine_deviation", affine},
                {"envelope_violations", envelope_violations}};
    }

    const ExperimentConfig& cfg_;
    Dataset data_;
    dataset::Split content_;
    std::size_t random_g0_;
    std::vector<double> grid_;
};

std::vector<Summary> scores_summary(const std::vector<RepOutcome>& reps, auto pick) {
    std::vector<double> r2, mae;
    for (const auto& r : reps) {
        const Score s = pick(r);
        r2.push_back(s.r2);
        mae.push_back(s.mae);
    }
    return {summarize(r2), summarize(mae)};
}

std::string ms_since(std::chrono::steady_clock::time_point t0) {
    const auto d = std::chrono::steady_clock::now() - t0;
    return std::to_string(std::chrono::duration_cast<std::chrono::milliseconds>(d).count());
}

}  // namespace

json run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
    const auto started = std::chrono::steady_clock::now();
    json timing;
    auto note = [&](const std::string& msg) {
        if (log) *log << msg << '\n';
    };

    StagingDir out(cfg.output_dir);
    auto pairs = cfg.stacking.pairs;
    const AlgorithmPair headline{cfg.base.algorithm, cfg.local.algorithm};
    if (std::find(pairs.begin(), pairs.end(), headline) == pairs.end()) pairs.push_back(headline);
    ExperimentConfig resolved = cfg;
    resolved.stacking.pairs = pairs;

    const auto data = stage("load", [&] {
        auto d = dataset::load_any(cfg.dataset);
        if (d.empty()) throw DataError("dataset " + cfg.dataset.string() + " has no rows");
        return d;
    });
    const auto content = stage("split", [&] {
        return dataset::content_split(data, cfg.split.ti_threshold, cfg.split.si_threshold);
    });
    const std::size_t random_g0 = cfg.split.g0_size ? cfg.split.g0_size : content.g0.size();
    const auto configured = stage("split", [&] {
        return cfg.split.mode == SplitMode::kContent ? content
                                                     : dataset::random_split(data, random_g0, derive_seed(cfg.seed, 60));
    });
    note("dataset: " + std::to_string(data.size()) + " rows; G0 " + std::to_string(configured.g0.size()) + ", G1 " +
         std::to_string(configured.g1.size()));

    const Experiment experiment(resolved, data, content, random_g0);
    const auto& grid = experiment.grid();
    auto t0 = std::chrono::steady_clock::now();
    const auto reps = stage("repetitions", [&] {
        return analysis::parallel_indexed<RepOutcome>(
            cfg.repetitions, cfg.workers, std::function<RepOutcome(std::size_t)>([&](std::size_t i) {
                const std::uint64_t s = cfg.seed + i;
                try {
                    return experiment.run(i, s);
                } catch (...) {
                    std::throw_with_nested(Error("repetition with seed " + std::to_string(s) + " failed"));
                }
            }));
    });
    timing["repetitions_ms"] = ms_since(t0);
    note("completed " + std::to_string(reps.size()) + " repetitions");

    json report;
    report["config"] = resolved.to_json();
    report["dataset"] = {{"rows", data.size()},
                         {"features", data.schema.names()},
                         {"split", cfg.split.mode == SplitMode::kContent ? "content" : "random"},
                         {"g0_rows", configured.g0.size()},
                         {"g1_rows", configured.g1.size()},
                         {"content_g0_rows", content.g0.size()},
                         {"content_g1_rows", content.g1.size()}};

    auto add_scores = [](std::vector<std::string>& row, const std::vector<Summary>& s) {
        row.insert(row.end(), {cell(s[0].mean), cell(s[0].ci), cell(s[1].mean), cell(s[1].ci)});
    };
    auto scores_json = [](const std::vector<Summary>& s) {
        return json{{"r2", summary_json(s[0])}, {"mae", summary_json(s[1])}};
    };
    const std::string reps_text = std::to_string(cfg.repetitions);

    // table3
    CsvTable t3({"features", "r2_mean", "r2_ci", "mae_mean", "mae_ci", "repetitions"});
    json t3j = json::array();
    for (bool all : {false, true}) {
        const auto s = scores_summary(reps, [all](const RepOutcome& r) { return all ? r.t3_all : r.t3_gf; });
        std::vector<std::string> row{all ? "with_content" : "without_content"};
        add_scores(row, s);
        row.push_back(reps_text);
        t3.add(row);
        t3j.push_back({{"features", row[0]}, {"scores", scores_json(s)}});
    }
    report["table3"] = t3j;

    // table4
    CsvTable t4({"split", "group", "r2_mean", "r2_ci", "mae_mean", "mae_ci"});
    json t4j = json::array();
    const std::array<std::string, 3> groups = {"overall", "G0", "G1"};
    for (std::size_t k = 0; k < 2; ++k) {
        for (std::size_t g = 0; g < 3; ++g) {
            const auto s = scores_summary(reps, [k, g](const RepOutcome& r) { return r.t4[k][g]; });
            std::vector<std::string> row{k == 0 ? "random" : "content", groups[g]};
            add_scores(row, s);
            t4.add(row);
            t4j.push_back({{"split", row[0]}, {"group", row[1]}, {"scores", scores_json(s)}});
        }
    }
    report["table4"] = t4j;

    // table5
    CsvTable t5({"model", "train_group", "test_group", "r2_mean", "r2_ci", "mae_mean", "mae_ci", "delta_r2"});
    json t5j = json::array();
    const std::array<std::string, 4> model_names = {"M0_GF", "M0_GF+SF", "M1_GF", "M1_GF+SF"};
    for (std::size_t m = 0; m < 4; ++m) {
        for (std::size_t t = 0; t < 2; ++t) {
            const auto s = scores_summary(reps, [m, t](const RepOutcome& r) { return r.t5[m][t]; });
            const bool cross = t != m / 2;
            double delta = kNaN;
            if (cross) {
                std::vector<double> d;
                for (const auto& r : reps) d.push_back(r.t5_delta[m]);
                delta = summarize(d).mean;
            }
            std::vector<std::string> row{model_names[m], "G" + std::to_string(m / 2), "G" + std::to_string(t)};
            add_scores(row, s);
            row.push_back(cross ? cell(delta) : "");
            t5.add(row);
            t5j.push_back({{"model", row[0]},
                           {"train_group", row[1]},
                           {"test_group", row[2]},
                           {"scores", scores_json(s)},
                           {"delta_r2", cross ? num(delta) : json(nullptr)}});
        }
    }
    report["table5"] = t5j;

    // table6 and weight-scan curves
    CsvTable t6({"base", "local", "w0_opt", "r2_opt_mean", "r2_opt_ci", "mae_opt_mean", "mae_opt_ci",
                 "r2_local_only", "r2_base_only"});
    CsvTable scan_csv({"base", "local", "w0", "r2_mean", "r2_ci", "mae_mean", "mae_ci"});
    std::ostringstream dat;
    json t6j = json::array();
    json scanj = json::array();
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        std::vector<std::vector<Summary>> curve;
        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            curve.push_back(scores_summary(reps, [p, gi](const RepOutcome& r) { return r.scans[p][gi]; }));
        }
        std::size_t best = 0;
        for (std::size_t gi = 1; gi < grid.size(); ++gi) {
            if (curve[gi][0].mean > curve[best][0].mean) best = gi;
        }
        const std::string b = algo(pairs[p].first), l = algo(pairs[p].second);
        dat << "# base=" << b << " local=" << l << "\n# w0 r2_mean r2_ci mae_mean mae_ci\n";
        json points = json::array();
        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            std::vector<std::string> row{b, l, cell(grid[gi])};
            add_scores(row, curve[gi]);
            scan_csv.add(row);
            dat << cell(grid[gi]) << ' ' << cell(curve[gi][0].mean) << ' ' << cell(curve[gi][0].ci) << ' '
                << cell(curve[gi][1].mean) << ' ' << cell(curve[gi][1].ci) << '\n';
            points.push_back({{"w0", grid[gi]}, {"scores", scores_json(curve[gi])}});
        }
        dat << "\n\n";
        t6.add({b, l, cell(grid[best]), cell(curve[best][0].mean), cell(curve[best][0].ci), cell(curve[best][1].mean),
                cell(curve[best][1].ci), cell(curve.front()[0].mean), cell(curve.back()[0].mean)});
        t6j.push_back({{"base", b},
                       {"local", l},
                       {"w0_opt", grid[best]},
                       {"scores_opt", scores_json(curve[best])},
                       {"r2_local_only", num(curve.front()[0].mean)},
                       {"r2_base_only", num(curve.back()[0].mean)}});
        scanj.push_back({{"base", b}, {"local", l}, {"curve", points}});
    }
    report["table6"] = t6j;
    report["headline_pair"] = pair_name(headline);
    report["weight_scan"] = scanj;
    report["stacking_checks"] = reps.front().checks;

    // KS screen on the configured split.
    t0 = std::chrono::steady_clock::now();
    const auto ks = stage("ks", [&] { return analysis::ks_feature_screen(configured.g0, configured.g1, cfg.analysis.ks_alpha); });
    CsvTable ks_csv({"feature", "statistic", "p_value", "n1", "n2", "specific_candidate"});
    json ksj = json::array();
    for (const auto& f : ks) {
        ks_csv.add({f.feature, cell(f.result.statistic), cell(f.result.p_value), std::to_string(f.result.n1),
                    std::to_string(f.result.n2), f.specific_candidate ? "1" : "0"});
        ksj.push_back({{"feature", f.feature},
                       {"statistic", f.result.statistic},
                       {"p_value", f.result.p_value},
                       {"n1", f.result.n1},
                       {"n2", f.result.n2},
                       {"specific_candidate", f.specific_candidate}});
    }
    report["ks_screen"] = {{"alpha", cfg.analysis.ks_alpha}, {"features", ksj}};
    timing["ks_ms"] = ms_since(t0);

    std::vector<SeedEntry> one_off;

    // Model-tree structure per group, with and without content features.
    t0 = std::chrono::steady_clock::now();
    CsvTable mt_csv({"group", "features", "rows", "leaves", "decision_features", "intercept_only_leaves"});
    json mtj = json::array();
    stage("model_tree", [&] {
        for (std::size_t g = 0; g < 2; ++g) {
            for (bool all : {false, true}) {
                const auto& group = g == 0 ? configured.g0 : configured.g1;
                const auto train = all ? group : dataset::project_features(group, Projection::kGenericOnly);
                const auto s = derive_seed(cfg.seed, 70 + 2 * g + (all ? 1 : 0));
                const std::string name = "G" + std::to_string(g) + (all ? ".all" : ".generic");
                one_off.push_back({"model_tree." + name, s});
                const auto m = learners::fit(cfg.spec_for(Algorithm::kModelTree, s), train);
                const auto& tree = *m.model_tree();
                std::string features;
                for (const auto& f : learners::decision_features(tree)) features += (features.empty() ? "" : ";") + f;
                mt_csv.add({"G" + std::to_string(g), all ? "all" : "generic", std::to_string(train.size()),
                            std::to_string(learners::count_leaves(tree)), features,
                            std::to_string(tree.fallback_count())});
                mtj.push_back({{"group", "G" + std::to_string(g)},
                               {"features", all ? "all" : "generic"},
                               {"rows", train.size()},
                               {"leaves", learners::count_leaves(tree)},
                               {"decision_features", learners::decision_features(tree)},
                               {"intercept_only_leaves", tree.fallback_count()}});
            }
        }
    });
    report["model_tree"] = mtj;
    timing["model_tree_ms"] = ms_since(t0);

    // SHAP attributions of a with-content GBT on the full dataset.
    t0 = std::chrono::steady_clock::now();
    CsvTable shap_sum({"feature", "mean_abs_phi", "sign"});
    CsvTable shap_vals({"row_id", "feature", "feature_value", "phi"});
    if (cfg.analysis.shap) {
        stage("shap", [&] {
            const auto s = derive_seed(cfg.seed, 80);
            one_off.push_back({"shap.fit", s});
            const auto model = learners::fit(cfg.spec_for(Algorithm::kGbt, s), data);
            Dataset rows = data;
            if (cfg.analysis.shap_rows && cfg.analysis.shap_rows < rows.size()) rows.rows.resize(cfg.analysis.shap_rows);
            const auto shap = analysis::tree_shap(model, rows);
            double max_err = 0.0;
            for (std::size_t i = 0; i < shap.phi.size(); ++i) {
                double total = shap.base_value;
                for (std::size_t j = 0; j < shap.features.size(); ++j) {
                    total += shap.phi[i][j];
                    shap_vals.add({std::to_string(i), shap.features[j], cell(shap.values[i][j]), cell(shap.phi[i][j])});
                }
                max_err = std::max(max_err, std::abs(total - shap.predictions[i]));
            }
            json sumj = json::array();
            for (const auto& r : analysis::shap_summary(shap)) {
                shap_sum.add({r.feature, cell(r.mean_abs_phi), std::to_string(r.sign)});
                sumj.push_back({{"feature", r.feature}, {"mean_abs_phi", r.mean_abs_phi}, {"sign", r.sign}});
            }
            report["shap"] = {{"rows", rows.size()},
                              {"base_value", shap.base_value},
                              {"max_local_accuracy_error", max_err},
                              {"summary", sumj}};
        });
    }
    timing["shap_ms"] = ms_since(t0);

    CsvTable ledger({"stage", "repetition", "seed"});
    ledger.add({"config", "-", std::to_string(cfg.seed)});
    if (cfg.split.mode == SplitMode::kRandom) ledger.add({"split.random", "-", std::to_string(derive_seed(cfg.seed, 60))});
    for (const auto& e : one_off) ledger.add({e.stage, "-", std::to_string(e.seed)});
    for (std::size_t r = 0; r < reps.size(); ++r) {
        ledger.add({"repetition", std::to_string(r), std::to_string(cfg.seed + r)});
        for (const auto& e : reps[r].seeds) ledger.add({e.stage, std::to_string(r), std::to_string(e.seed)});
    }

    bool identities_ok = true;
    for (const auto& [name, c] : report["stacking_checks"]["stacking"].items()) {
        identities_ok = identities_ok && c["w0_zero_equals_local"].get<bool>() && c["w0_one_equals_base"].get<bool>() &&
                        c["max_affine_deviation"].get<double>() < 1e-12 && c["envelope_violations"].get<std::size_t>() == 0;
    }
    for (const auto& [name, ok] : report["stacking_checks"]["transfer_exact"].items()) {
        identities_ok = identities_ok && ok.get<bool>();
    }
    report["stacking_checks"]["all_passed"] = identities_ok;

    stage("write", [&] {
        out.write("config.json", resolved.to_json().dump(2) + "\n");
        out.write("table3.csv", t3.str());
        out.write("table4.csv", t4.str());
        out.write("table5.csv", t5.str());
        out.write("table6.csv", t6.str());
        out.write("weight_scan.csv", scan_csv.str());
        out.write("weight_scan.dat", dat.str());
        out.write("ks_screen.csv", ks_csv.str());
        out.write("model_tree.csv", mt_csv.str());
        if (cfg.analysis.shap) {
            out.write("shap_summary.csv", shap_sum.str());
            out.write("shap_values.csv", shap_vals.str());
        }
        out.write("seed_ledger.csv", ledger.str());
        out.write("models/base.json", reps.front().documents.at(0));
        out.write("models/local.json", reps.front().documents.at(1));
        out.write("report.json", report.dump(2) + "\n");
        if (cfg.timing) {
            timing["total_ms"] = ms_since(started);
            out.write("timing.json", timing.dump(2) + "\n");
        }
        out.commit();
    });
    return report;
}

}  // namespace qoe::cli
