#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qoe/analysis/metrics.hpp"
#include "qoe/dataset/dataset.hpp"
#include "qoe/learners/spec.hpp"

namespace qoe::cli {

enum class SplitMode { kContent, kRandom };

struct SplitConfig {
    SplitMode mode = SplitMode::kContent;
    double ti_threshold = 85.0;
    double si_threshold = 85.0;
    /// Random-split G0 size; 0 takes the size of the content split's G0.
    std::size_t g0_size = 0;
};

struct RoleConfig {
    learners::Algorithm algorithm = learners::Algorithm::kGbt;
    dataset::Projection projection = dataset::Projection::kAll;
};

using AlgorithmPair = std::pair<learners::Algorithm, learners::Algorithm>;  // (base, local)

struct StackingConfig {
    double grid_step = 0.1;
    std::vector<AlgorithmPair> pairs;  ///< defaults to all nine pairs
};

struct AnalysisConfig {
    double ks_alpha = 0.01;
    analysis::RSquared r2 = analysis::RSquared::kPearson;
    bool shap = true;
    /// Rows explained by SHAP; 0 explains every row.
    std::size_t shap_rows = 0;
};

struct ExperimentConfig {
    std::filesystem::path dataset;
    std::filesystem::path output_dir;
    std::uint64_t seed = 0;
    std::size_t repetitions = 100;
    double train_fraction = 0.7;
    learners::Algorithm primary_algorithm = learners::Algorithm::kGbt;
    std::size_t workers = 0;
    bool timing = false;
    SplitConfig split;
    RoleConfig base{learners::Algorithm::kGbt, dataset::Projection::kGenericOnly};
    RoleConfig local{learners::Algorithm::kGbt, dataset::Projection::kAll};
    StackingConfig stacking;
    AnalysisConfig analysis;
    std::map<learners::Algorithm, std::map<std::string, double>> hyperparameters;

    [[nodiscard]] learners::RegressorSpec spec_for(learners::Algorithm algorithm, std::uint64_t seed) const;
    /// Resolved configuration, suitable for echoing into reports.
    [[nodiscard]] nlohmann::ordered_json to_json() const;
};

/// Parses TOML text. `overrides` are "dotted.path=value" strings applied on
/// top of the file; values use TOML syntax, falling back to a bare string.
/// Relative paths resolve against `base_dir`. Throws ConfigError.
ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides,
                              const std::filesystem::path& base_dir);

/// Reads and parses a config file and checks that the dataset exists.
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace qoe::cli
