#include "qoe/cli/commands.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qoe/analysis/ks.hpp"
#include "qoe/analysis/shap.hpp"
#include "qoe/cli/config.hpp"
#include "qoe/cli/report_io.hpp"
#include "qoe/cli/run.hpp"
#include "qoe/cli/synth.hpp"
#include "qoe/dataset/csv.hpp"
#include "qoe/dataset/session.hpp"
#include "qoe/error.hpp"
#include "qoe/stacking/document.hpp"
#include "qoe/stacking/evaluate.hpp"
#include "qoe/stacking/stacked.hpp"

namespace qoe::cli {
namespace {

namespace fs = std::filesystem;
using learners::Algorithm;

int classify(const std::exception& e) {
    if (dynamic_cast<const DivergenceError*>(&e)) return kExitDivergence;
    if (dynamic_cast<const TransferError*>(&e)) return kExitTransfer;
    if (dynamic_cast<const DataError*>(&e)) return kExitData;
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const UnsupportedModelError*>(&e)) return kExitConfig;
    return kExitFailure;
}

/// Writes to `path`, or to standard output when it is empty.
void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
    } else {
        write_text_atomic(path, text);
    }
}

analysis::RSquared r2_mode(const std::string& text) {
    if (text == "pearson") return analysis::RSquared::kPearson;
    if (text == "determination") return analysis::RSquared::kDetermination;
    throw ConfigError("unknown R² mode '" + text + "'");
}

std::map<std::string, double> parse_settings(const std::vector<std::string>& settings) {
    std::map<std::string, double> out;
    for (const auto& s : settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("setting '" + s + "' is not name=value");
        const auto v = dataset::csv::parse_real(s.substr(eq + 1));
        if (!v) throw ConfigError("setting '" + s + "' has a non-numeric value");
        out[s.substr(0, eq)] = *v;
    }
    return out;
}

std::string predictions_csv(const dataset::Dataset& data, const std::vector<double>& pred) {
    CsvTable t({"row_id", "prediction", "mos"});
    for (std::size_t i = 0; i < pred.size(); ++i) {
        t.add({std::to_string(i), cell(pred[i]), cell(data.rows[i].label)});
    }
    return t.str();
}

learners::RegressorModel load_model(const std::string& path, const dataset::FeatureSchema& local) {
    return stacking::import_model(stacking::read_document(path), local);
}

/// "--a.b=v" and "--a.b v" become "a.b=v".
std::vector<std::string> overrides_from(const std::vector<std::string>& extras) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const auto& arg = extras[i];
        if (arg.rfind("--", 0) != 0 || arg.size() <= 2) throw ConfigError("unexpected argument '" + arg + "'");
        const auto body = arg.substr(2);
        if (body.find('=') != std::string::npos) {
            out.push_back(body);
        } else if (i + 1 < extras.size()) {
            out.push_back(body + "=" + extras[++i]);
        } else {
            throw ConfigError("override '" + arg + "' has no value");
        }
    }
    return out;
}

}  // namespace

int exit_code_for(const std::exception& e) {
    int code = classify(e);
    try {
        std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
        const int c = exit_code_for(inner);
        if (c != kExitFailure) code = c;
    } catch (...) {
    }
    return code;
}

std::string describe(const std::exception& e) {
    std::string text = e.what();
    try {
        std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
        text += ": " + describe(inner);
    } catch (...) {
    }
    return text;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Transfer learning and stacking for video QoE estimation"};
    app.require_subcommand(1);

    // ingest
    std::string ingest_in, ingest_out;
    auto* ingest = app.add_subcommand("ingest", "Extract the feature table from a session CSV");
    ingest->add_option("sessions", ingest_in, "Session CSV")->required();
    ingest->add_option("-o,--output", ingest_out, "Feature table CSV (default: stdout)");

    // synth
    SynthParams synth_params;
    std::optional<std::size_t> synth_g0;
    std::string synth_out;
    bool synth_features = false;
    auto* synth = app.add_subcommand("synth", "Generate synthetic sessions with two content clusters");
    synth->add_option("-n,--sessions", synth_params.n, "Number of sessions")->capture_default_str();
    synth->add_option("--g0-count", synth_g0, "Sessions in the low-complexity cluster (default: n*353/450)");
    synth->add_option("--contents", synth_params.contents, "Number of distinct contents")->capture_default_str();
    synth->add_option("--noise", synth_params.noise_sd, "MOS noise standard deviation")->capture_default_str();
    synth->add_option("--seed", synth_params.seed, "Generator seed")->required();
    synth->add_flag("--features", synth_features, "Write the extracted feature table instead of sessions");
    synth->add_option("-o,--output", synth_out, "Output CSV (default: stdout)");

    // split
    std::string split_in, split_mode = "content", split_out0, split_out1;
    double split_ti = 85.0, split_si = 85.0, split_fraction = 0.7;
    std::size_t split_g0 = 0;
    std::uint64_t split_seed = 0;
    auto* split = app.add_subcommand("split", "Split a dataset into two parts");
    split->add_option("data", split_in, "Session CSV or feature table")->required();
    split->add_option("--mode", split_mode, "content, random or train_test")
        ->check(CLI::IsMember({"content", "random", "train_test"}))
        ->capture_default_str();
    split->add_option("--ti", split_ti, "TI threshold")->capture_default_str();
    split->add_option("--si", split_si, "SI threshold")->capture_default_str();
    split->add_option("--g0-size", split_g0, "Rows in the first part (random mode)");
    split->add_option("--fraction", split_fraction, "Training fraction (train_test mode)")->capture_default_str();
    split->add_option("--seed", split_seed, "Seed (random and train_test modes)");
    split->add_option("--out0", split_out0, "First part (G0 or train)")->required();
    split->add_option("--out1", split_out1, "Second part (G1 or test)")->required();

    // train
    std::string train_in, train_algo = "gbt", train_features = "all", train_out, train_provenance;
    std::vector<std::string> train_settings;
    std::uint64_t train_seed = 0;
    bool train_as_base = false;
    auto* train = app.add_subcommand("train", "Fit a regressor and write its model document");
    train->add_option("data", train_in, "Training data")->required();
    train->add_option("-a,--algorithm", train_algo, "gbt, mlp or model_tree")->capture_default_str();
    train->add_option("--features", train_features, "all or generic")
        ->check(CLI::IsMember({"all", "generic"}))
        ->capture_default_str();
    train->add_option("--seed", train_seed, "Training seed")->required();
    train->add_option("--set", train_settings, "Hyperparameter override name=value");
    train->add_option("--provenance", train_provenance, "Provenance text stored in the document");
    train->add_flag("--as-base", train_as_base, "Mark the document as a transferable base model");
    train->add_option("-o,--output", train_out, "Model document")->required();

    // export
    std::string export_in, export_out;
    auto* exp = app.add_subcommand("export", "Re-export a model document as a base model for transfer");
    exp->add_option("model", export_in, "Model document")->required();
    exp->add_option("-o,--output", export_out, "Base model document")->required();

    // import
    std::string import_doc, import_data, import_out;
    auto* imp = app.add_subcommand("import", "Bind a transferred model to local data and predict");
    imp->add_option("model", import_doc, "Model document")->required();
    imp->add_option("data", import_data, "Local data")->required();
    imp->add_option("-o,--output", import_out, "Predictions CSV (default: stdout)");

    // stack
    std::string stack_base, stack_local, stack_data, stack_out;
    double stack_w0 = 0.5;
    auto* stack = app.add_subcommand("stack", "Predict with the weighted average of a base and a local model");
    stack->add_option("base", stack_base, "Base model document")->required();
    stack->add_option("local", stack_local, "Local model document")->required();
    stack->add_option("data", stack_data, "Local data")->required();
    stack->add_option("--w0", stack_w0, "Base model weight")->capture_default_str();
    stack->add_option("-o,--output", stack_out, "Predictions CSV (default: stdout)");

    // scan
    std::string scan_base, scan_local, scan_data, scan_out, scan_r2 = "pearson";
    double scan_step = 0.1;
    auto* scan = app.add_subcommand("scan", "Evaluate stacking over a grid of base weights");
    scan->add_option("base", scan_base, "Base model document")->required();
    scan->add_option("local", scan_local, "Local model document")->required();
    scan->add_option("data", scan_data, "Labelled test data")->required();
    scan->add_option("--step", scan_step, "Grid step")->capture_default_str();
    scan->add_option("--r2", scan_r2, "pearson or determination")->capture_default_str();
    scan->add_option("-o,--output", scan_out, "Curve CSV (default: stdout)");

    // evaluate
    std::string eval_doc, eval_group, eval_out, eval_r2 = "pearson";
    std::vector<std::string> eval_data;
    auto* evaluate = app.add_subcommand("evaluate", "R² and MAE of a model on named test sets");
    evaluate->add_option("model", eval_doc, "Model document")->required();
    evaluate->add_option("data", eval_data, "Test sets; each is named by its file stem")->required();
    evaluate->add_option("--train-group", eval_group, "Name of the model's own test set, for deltas");
    evaluate->add_option("--r2", eval_r2, "pearson or determination")->capture_default_str();
    evaluate->add_option("-o,--output", eval_out, "Table CSV (default: stdout)");

    // shap
    std::string shap_doc, shap_data, shap_out, shap_summary_out;
    auto* shap = app.add_subcommand("shap", "TreeSHAP attributions of a GBT model");
    shap->add_option("model", shap_doc, "GBT model document")->required();
    shap->add_option("data", shap_data, "Rows to explain")->required();
    shap->add_option("-o,--output", shap_out, "row_id,feature,feature_value,phi CSV (default: stdout)");
    shap->add_option("--summary", shap_summary_out, "Ranking CSV");

    // ks
    std::string ks_a, ks_b, ks_out;
    double ks_alpha = 0.01;
    auto* ks = app.add_subcommand("ks", "Two-sample KS screen of every feature");
    ks->add_option("g0", ks_a, "First group")->required();
    ks->add_option("g1", ks_b, "Second group")->required();
    ks->add_option("--alpha", ks_alpha, "Significance level")->capture_default_str();
    ks->add_option("-o,--output", ks_out, "Screen CSV (default: stdout)");

    // run
    std::string run_config;
    bool run_quiet = false;
    auto* run = app.add_subcommand("run", "Run a configured experiment; --dotted.key=value overrides config fields");
    run->add_option("config", run_config, "TOML config")->required();
    run->add_flag("-q,--quiet", run_quiet, "No progress output");
    run->allow_extras();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*ingest) {
            const auto sessions = dataset::load_sessions(ingest_in);
            const auto data = dataset::extract_dataset(sessions, ingest_in);
            std::ostringstream text;
            dataset::write_feature_table(text, data);
            emit(ingest_out, text.str());
            std::cerr << "extracted " << data.size() << " rows\n";
        } else if (*synth) {
            if (synth_g0) {
                synth_params.g0_count = *synth_g0;
            } else {
                synth_params.g0_count = static_cast<std::size_t>(
                    std::llround(static_cast<double>(synth_params.n) * 353.0 / 450.0));
            }
            const auto sessions = synthesize(synth_params);
            std::ostringstream text;
            if (synth_features) {
                dataset::write_feature_table(text, dataset::extract_dataset(sessions, "synthetic"));
            } else {
                dataset::write_sessions(text, sessions);
            }
            emit(synth_out, text.str());
        } else if (*split) {
            const auto data = dataset::load_any(split_in);
            dataset::Dataset a, b;
            if (split_mode == "content") {
                auto s = dataset::content_split(data, split_ti, split_si);
                a = std::move(s.g0);
                b = std::move(s.g1);
            } else if (split_mode == "random") {
                if (split_g0 == 0) throw ConfigError("--g0-size is required in random mode");
                auto s = dataset::random_split(data, split_g0, split_seed);
                a = std::move(s.g0);
                b = std::move(s.g1);
            } else {
                auto s = dataset::train_test_split(data, split_fraction, split_seed);
                a = std::move(s.train);
                b = std::move(s.test);
            }
            std::ostringstream ta, tb;
            dataset::write_feature_table(ta, a);
            dataset::write_feature_table(tb, b);
            write_text_atomic(split_out0, ta.str());
            write_text_atomic(split_out1, tb.str());
            std::cerr << "wrote " << a.size() << " and " << b.size() << " rows\n";
        } else if (*train) {
            auto data = dataset::load_any(train_in);
            if (train_features == "generic") data = dataset::project_features(data, dataset::Projection::kGenericOnly);
            const auto spec = learners::RegressorSpec::make(learners::algorithm_from_string(train_algo),
                                                            parse_settings(train_settings), train_seed);
            const auto model = learners::fit(spec, data);
            const auto doc = stacking::export_model(model, train_as_base,
                                                    train_provenance.empty() ? train_in : train_provenance);
            stacking::write_document(train_out, doc);
        } else if (*exp) {
            const auto doc = stacking::read_document(export_in);
            const auto model = stacking::import_model(doc);
            stacking::write_document(export_out, stacking::export_model(model, true, doc.provenance));
        } else if (*imp) {
            const auto data = dataset::load_any(import_data);
            const auto model = load_model(import_doc, data.schema);
            emit(import_out, predictions_csv(data, model.predict(data)));
        } else if (*stack) {
            const auto data = dataset::load_any(stack_data);
            const stacking::StackedModel stacked(load_model(stack_base, data.schema),
                                                 load_model(stack_local, data.schema), stack_w0);
            emit(stack_out, predictions_csv(data, stacking::stack_predict(stacked, data)));
        } else if (*scan) {
            const auto data = dataset::load_any(scan_data);
            const auto result = stacking::weight_scan(load_model(scan_base, data.schema),
                                                      load_model(scan_local, data.schema), data, scan_step,
                                                      r2_mode(scan_r2));
            CsvTable t({"w0", "r2", "mae"});
            for (const auto& p : result.curve) t.add({cell(p.w0), cell(p.r2), cell(p.mae)});
            emit(scan_out, t.str());
            std::cerr << "optimum w0 = " << cell(result.optimum().w0) << " (R² " << cell(result.optimum().r2) << ")\n";
        } else if (*evaluate) {
            const auto doc = stacking::read_document(eval_doc);
            const auto model = stacking::import_model(doc);
            std::vector<stacking::NamedDataset> sets;
            for (const auto& p : eval_data) sets.emplace_back(fs::path(p).stem().string(), dataset::load_any(p));
            const auto cells = stacking::cross_evaluate(model, eval_group, sets, r2_mode(eval_r2));
            CsvTable t({"train_group", "test_group", "r2", "mae", "delta_r2", "error"});
            for (const auto& c : cells) {
                t.add({c.train_group, c.test_group, c.result ? cell(c.result->r2) : "",
                       c.result ? cell(c.result->mae) : "", c.delta_r2 ? cell(*c.delta_r2) : "", c.error});
            }
            emit(eval_out, t.str());
        } else if (*shap) {
            const auto data = dataset::load_any(shap_data);
            const auto report = analysis::tree_shap(load_model(shap_doc, data.schema), data);
            CsvTable values({"row_id", "feature", "feature_value", "phi"});
            for (std::size_t i = 0; i < report.phi.size(); ++i) {
                for (std::size_t j = 0; j < report.features.size(); ++j) {
                    values.add({std::to_string(i), report.features[j], cell(report.values[i][j]),
                                cell(report.phi[i][j])});
                }
            }
            emit(shap_out, values.str());
            if (!shap_summary_out.empty()) {
                CsvTable summary({"feature", "mean_abs_phi", "sign"});
                for (const auto& r : analysis::shap_summary(report)) {
                    summary.add({r.feature, cell(r.mean_abs_phi), std::to_string(r.sign)});
                }
                write_text_atomic(shap_summary_out, summary.str());
            }
        } else if (*ks) {
            const auto screen = analysis::ks_feature_screen(dataset::load_any(ks_a), dataset::load_any(ks_b), ks_alpha);
            CsvTable t({"feature", "statistic", "p_value", "n1", "n2", "specific_candidate"});
            for (const auto& f : screen) {
                t.add({f.feature, cell(f.result.statistic), cell(f.result.p_value), std::to_string(f.result.n1),
                       std::to_string(f.result.n2), f.specific_candidate ? "1" : "0"});
            }
            emit(ks_out, t.str());
        } else if (*run) {
            const auto cfg = load_config(run_config, overrides_from(run->remaining()));
            const auto report = run_experiment(cfg, run_quiet ? nullptr : &std::cerr);
            if (!run_quiet) {
                std::cerr << "report written to " << cfg.output_dir.string() << '\n';
                for (const auto& row : report["table6"]) {
                    std::cerr << "  " << row["base"].get<std::string>() << " -> " << row["local"].get<std::string>()
                              << ": w0* = " << row["w0_opt"].dump() << ", R² = "
                              << row["scores_opt"]["r2"]["mean"].dump() << '\n';
                }
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << describe(e) << '\n';
        return exit_code_for(e);
    }
    return kExitOk;
}

}  // namespace qoe::cli
