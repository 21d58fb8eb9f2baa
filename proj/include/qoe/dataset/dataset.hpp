#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "qoe/dataset/schema.hpp"

namespace qoe::dataset {

struct FeatureVector {
    std::vector<double> values;
    double label = 0.0;

    bool operator==(const FeatureVector&) const = default;
};

/// Feature rows sharing one schema. Immutable by convention once built.
struct Dataset {
    FeatureSchema schema;
    std::vector<FeatureVector> rows;
    std::string provenance;

    [[nodiscard]] std::size_t size() const noexcept { return rows.size(); }
    [[nodiscard]] bool empty() const noexcept { return rows.empty(); }
    [[nodiscard]] std::vector<double> labels() const;
    [[nodiscard]] std::vector<double> column(std::size_t j) const;
    /// Rows selected by index, in the given order.
    [[nodiscard]] Dataset subset(const std::vector<std::size_t>& indices, std::string provenance) const;
};

/// Throws SchemaError if any row length differs from the schema or holds a
/// non-finite value.
void check_conforms(const Dataset& data);

enum class Projection { kGenericOnly, kAll };

Dataset project_features(const Dataset& data, Projection keep);

/// Reorders/selects the columns of `data` to match `target`. Throws
/// SchemaError naming every feature of `target` missing from `data`.
Dataset select_columns(const Dataset& data, const FeatureSchema& target);

struct Split {
    Dataset g0;
    Dataset g1;
};

/// Rows with TI < ti_threshold and SI < si_threshold go to g0, the rest to g1.
Split content_split(const Dataset& data, double ti_threshold, double si_threshold);

/// Seeded uniform shuffle; the first g0_size shuffled rows form g0.
Split random_split(const Dataset& data, std::size_t g0_size, std::uint64_t seed);

struct TrainTest {
    Dataset train;
    Dataset test;
};

/// |train| = round-half-up(train_fraction * |data|).
TrainTest train_test_split(const Dataset& data, double train_fraction, std::uint64_t seed);

/// Feature-table CSV: feature names then `mos` as header. Kinds of read
/// columns follow standard_kind().
void write_feature_table(std::ostream& out, const Dataset& data);
void write_feature_table(const std::filesystem::path& path, const Dataset& data);
Dataset parse_feature_table(std::istream& in, std::string provenance);
Dataset load_feature_table(const std::filesystem::path& path);

/// Loads either a session CSV (features extracted) or a feature table,
/// detected from the header.
Dataset load_any(const std::filesystem::path& path);

}  // namespace qoe::dataset
