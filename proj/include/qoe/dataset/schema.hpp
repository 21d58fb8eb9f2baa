#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qoe::dataset {

/// Generic features have a universal effect on perceived quality; specific
/// features only hold in a local context and never leave the local node.
enum class FeatureKind { kGeneric, kSpecific };

std::string_view to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(std::string_view text);

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::kGeneric;

    bool operator==(const FeatureSpec&) const = default;
};

/// Ordered, uniquely named feature columns.
class FeatureSchema {
  public:
    FeatureSchema() = default;
    /// Throws SchemaError on duplicate or empty names.
    explicit FeatureSchema(std::vector<FeatureSpec> entries);

    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] const std::vector<FeatureSpec>& entries() const noexcept { return entries_; }
    [[nodiscard]] const FeatureSpec& operator[](std::size_t i) const { return entries_[i]; }

    [[nodiscard]] std::optional<std::size_t> index_of(std::string_view name) const;
    [[nodiscard]] bool contains(std::string_view name) const { return index_of(name).has_value(); }
    [[nodiscard]] std::vector<std::string> names() const;
    [[nodiscard]] std::vector<std::string> names_of(FeatureKind kind) const;
    [[nodiscard]] bool generic_only() const;

    /// Generic entries in their original relative order.
    [[nodiscard]] FeatureSchema generic_projection() const;

    bool operator==(const FeatureSchema&) const = default;

  private:
    std::vector<FeatureSpec> entries_;
};

/// Standard feature names, in emission order.
namespace feature {
inline constexpr std::string_view kTi = "TI";
inline constexpr std::string_view kSi = "SI";
inline constexpr std::string_view kFps = "fps";
inline constexpr std::string_view kNStalls = "nstalls";
inline constexpr std::string_view kStallTimeIntermediateTotal = "stallTimeIntermediateTotal";
inline constexpr std::string_view kStallTimeInitialTotal = "stallTimeInitialTotal";
inline constexpr std::string_view kMeanBitrate = "meanBitrate";
inline constexpr std::string_view kBitrateTrend = "bitrateTrend";
inline constexpr std::string_view kLastBitrate = "lastbitrate";
}  // namespace feature

inline constexpr std::string_view kLabelColumn = "mos";

/// The nine-feature schema with TI and SI tagged specific.
const FeatureSchema& qoe_feature_schema();

/// Kind of a feature name under the standard tagging; names outside the
/// standard set are treated as generic.
FeatureKind standard_kind(std::string_view name);

}  // namespace qoe::dataset
