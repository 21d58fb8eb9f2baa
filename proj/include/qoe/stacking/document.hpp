#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "qoe/dataset/schema.hpp"
#include "qoe/learners/regressor.hpp"

namespace qoe::stacking {

inline constexpr int kFormatVersion = 1;

enum class DocumentRole { kBase, kLocal };

/// Portable, self-describing model file exchanged between nodes.
///
/// JSON layout (key order fixed):
///   format_version, algorithm, role, feature_schema [{name, kind}],
///   target_scale {min, max}, params {...}, provenance
struct ModelDocument {
    int format_version = kFormatVersion;
    learners::Algorithm algorithm = learners::Algorithm::kGbt;
    DocumentRole role = DocumentRole::kLocal;
    dataset::FeatureSchema feature_schema;
    double target_min = 0.0;
    double target_max = 100.0;
    nlohmann::ordered_json params;
    std::string provenance;

    [[nodiscard]] nlohmann::ordered_json to_json() const;
    /// Canonical text: two-space indented JSON plus trailing newline.
    [[nodiscard]] std::string serialize() const;

    /// Throws TransferError for unsupported versions, unknown algorithms or
    /// malformed content, and for base documents carrying specific features.
    static ModelDocument from_json(const nlohmann::ordered_json& j);
    static ModelDocument parse(const std::string& text);
};

/// Throws TransferError listing the specific features when exporting a base
/// model whose schema is not generic-only.
ModelDocument export_model(const learners::RegressorModel& model, bool as_base, std::string provenance = {});

/// Rebuilds the model and binds it to `local_schema` so predictions project
/// local rows onto the document's features. Throws TransferError naming any
/// document feature absent locally.
learners::RegressorModel import_model(const ModelDocument& doc, const dataset::FeatureSchema& local_schema);

/// Rebuilds the model on its own schema (no binding).
learners::RegressorModel import_model(const ModelDocument& doc);

/// Atomic write (temporary file + rename).
void write_document(const std::filesystem::path& path, const ModelDocument& doc);
ModelDocument read_document(const std::filesystem::path& path);

}  // namespace qoe::stacking
