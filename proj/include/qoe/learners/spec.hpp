#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace qoe::learners {

enum class Algorithm { kGbt, kMlp, kModelTree };

/// "gbt", "mlp", "model_tree".
std::string_view to_string(Algorithm algorithm);
/// Throws ConfigError for unknown names.
Algorithm algorithm_from_string(std::string_view text);

/// Algorithm plus a complete hyperparameter map. Construct through make(),
/// which fills defaults and rejects unknown names or out-of-range values.
struct RegressorSpec {
    Algorithm algorithm = Algorithm::kGbt;
    std::map<std::string, double> hyperparameters;
    std::uint64_t seed = 0;

    static RegressorSpec make(Algorithm algorithm, const std::map<std::string, double>& overrides = {},
                              std::uint64_t seed = 0);

    [[nodiscard]] double get(const std::string& name) const;
    [[nodiscard]] RegressorSpec with_seed(std::uint64_t new_seed) const;

    bool operator==(const RegressorSpec&) const = default;
};

/// Default hyperparameters for an algorithm.
std::map<std::string, double> default_hyperparameters(Algorithm algorithm);

}  // namespace qoe::learners
