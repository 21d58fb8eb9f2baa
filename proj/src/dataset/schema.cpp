#include "qoe/dataset/schema.hpp"

#include <algorithm>
#include <unordered_set>

#include "qoe/error.hpp"

namespace qoe::dataset {

std::string_view to_string(FeatureKind kind) {
    return kind == FeatureKind::kGeneric ? "generic" : "specific";
}

FeatureKind feature_kind_from_string(std::string_view text) {
    if (text == "generic") return FeatureKind::kGeneric;
    if (text == "specific") return FeatureKind::kSpecific;
    throw SchemaError("unknown feature kind '" + std::string(text) + "'");
}

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> entries) : entries_(std::move(entries)) {
    std::unordered_set<std::string_view> seen;
    for (const auto& e : entries_) {
        if (e.name.empty()) throw SchemaError("feature schema contains an empty name");
        if (!seen.insert(e.name).second) {
            throw SchemaError("duplicate feature name '" + e.name + "'");
        }
    }
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
    const auto it = std::find_if(entries_.begin(), entries_.end(),
                                 [&](const FeatureSpec& e) { return e.name == name; });
    if (it == entries_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - entries_.begin());
}

std::vector<std::string> FeatureSchema::names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.name);
    return out;
}

std::vector<std::string> FeatureSchema::names_of(FeatureKind kind) const {
    std::vector<std::string> out;
    for (const auto& e : entries_) {
        if (e.kind == kind) out.push_back(e.name);
    }
    return out;
}

bool FeatureSchema::generic_only() const {
    return std::all_of(entries_.begin(), entries_.end(),
                       [](const FeatureSpec& e) { return e.kind == FeatureKind::kGeneric; });
}

FeatureSchema FeatureSchema::generic_projection() const {
    std::vector<FeatureSpec> kept;
    for (const auto& e : entries_) {
        if (e.kind == FeatureKind::kGeneric) kept.push_back(e);
    }
    return FeatureSchema(std::move(kept));
}

const FeatureSchema& qoe_feature_schema() {
    static const FeatureSchema schema = [] {
        using namespace feature;
        std::vector<FeatureSpec> e;
        for (auto name : {kTi, kSi, kFps, kNStalls, kStallTimeIntermediateTotal,
                          kStallTimeInitialTotal, kMeanBitrate, kBitrateTrend, kLastBitrate}) {
            e.push_back({std::string(name), standard_kind(name)});
        }
        return FeatureSchema(std::move(e));
    }();
    return schema;
}

FeatureKind standard_kind(std::string_view name) {
    return (name == feature::kTi || name == feature::kSi) ? FeatureKind::kSpecific
                                                          : FeatureKind::kGeneric;
}

}  // namespace qoe::dataset
