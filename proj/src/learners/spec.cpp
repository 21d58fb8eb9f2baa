#include "qoe/learners/spec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qoe/dataset/csv.hpp"
#include "qoe/error.hpp"

namespace qoe::learners {
namespace {

struct Hyperparameter {
    const char* name;
    double fallback;
    double min;
    double max;
    bool integer;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// Ranges are inclusive. Defaults follow the reference configuration; rounds,
// epochs, batch size and the regularisers are not given there.
const std::vector<Hyperparameter>& table(Algorithm algorithm) {
    static const std::vector<Hyperparameter> gbt = {
        {"learning_rate", 0.004, 0.0, 1.0, false},
        {"max_depth", 4, 1, 32, true},
        {"subsample", 0.5, 1e-9, 1.0, false},
        {"colsample_bytree", 1.0, 1e-9, 1.0, false},
        {"n_rounds", 2000, 0, 1e6, true},
        {"lambda", 1.0, 0.0, kInf, false},
        {"min_child_weight", 1.0, 0.0, kInf, false},
    };
    static const std::vector<Hyperparameter> mlp = {
        {"learning_rate", 0.001, 0.0, 10.0, false},
        {"dropout", 0.3, 0.0, 0.95, false},
        {"hidden1", 32, 1, 4096, true},
        {"hidden2", 64, 1, 4096, true},
        {"epochs", 500, 0, 1e6, true},
        {"batch_size", 32, 1, 1e6, true},
    };
    static const std::vector<Hyperparameter> tree = {
        {"min_leaf", 4, 1, 1e9, true},
        {"smoothing_k", 15.0, 0.0, kInf, false},
        {"smoothing", 1, 0, 1, true},
        {"prune", 1, 0, 1, true},
        {"std_fraction", 0.05, 0.0, 1.0, false},
    };
    switch (algorithm) {
        case Algorithm::kGbt: return gbt;
        case Algorithm::kMlp: return mlp;
        case Algorithm::kModelTree: return tree;
    }
    return gbt;
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::kGbt: return "gbt";
        case Algorithm::kMlp: return "mlp";
        case Algorithm::kModelTree: return "model_tree";
    }
    return "unknown";
}

Algorithm algorithm_from_string(std::string_view text) {
    if (text == "gbt" || text == "xgboost") return Algorithm::kGbt;
    if (text == "mlp" || text == "nn") return Algorithm::kMlp;
    if (text == "model_tree" || text == "m5") return Algorithm::kModelTree;
    throw ConfigError("unknown algorithm '" + std::string(text) + "'");
}

std::map<std::string, double> default_hyperparameters(Algorithm algorithm) {
    std::map<std::string, double> out;
    for (const auto& h : table(algorithm)) out.emplace(h.name, h.fallback);
    return out;
}

RegressorSpec RegressorSpec::make(Algorithm algorithm, const std::map<std::string, double>& overrides,
                                  std::uint64_t seed) {
    RegressorSpec spec{algorithm, default_hyperparameters(algorithm), seed};
    const auto& known = table(algorithm);
    for (const auto& [name, value] : overrides) {
        const auto it = std::find_if(known.begin(), known.end(),
                                     [&](const Hyperparameter& h) { return name == h.name; });
        if (it == known.end()) {
            throw ConfigError("unknown hyperparameter '" + name + "' for " + std::string(to_string(algorithm)));
        }
        if (!(value >= it->min && value <= it->max) || (it->integer && std::floor(value) != value)) {
            throw ConfigError("hyperparameter '" + name + "' = " + dataset::csv::format_real(value) +
                              " outside its valid range");
        }
        spec.hyperparameters[name] = value;
    }
    return spec;
}

double RegressorSpec::get(const std::string& name) const {
    const auto it = hyperparameters.find(name);
    if (it == hyperparameters.end()) throw ConfigError("hyperparameter '" + name + "' not set");
    return it->second;
}

RegressorSpec RegressorSpec::with_seed(std::uint64_t new_seed) const {
    RegressorSpec copy = *this;
    copy.seed = new_seed;
    return copy;
}

}  // namespace qoe::learners
