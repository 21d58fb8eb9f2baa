#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "qoe/cli/config.hpp"

namespace qoe::cli {

/// Files of a run report, in the order they are written.
inline const std::vector<std::string> kReportFiles = {
    "config.json",      "table3.csv",       "table4.csv",    "table5.csv",          "table6.csv",
    "weight_scan.csv",  "weight_scan.dat",  "ks_screen.csv", "model_tree.csv",      "shap_summary.csv",
    "shap_values.csv",  "seed_ledger.csv",  "models/base.json", "models/local.json", "report.json",
};

/// Runs the full experiment: split, base training on G0 generic features,
/// local training on G1, transfer, stacking with weight scans, and the
/// repeated evaluation tables. Writes the report directory atomically;
/// on failure nothing is left behind. Errors name the failing stage.
nlohmann::ordered_json run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

}  // namespace qoe::cli
