#include "qoe/stacking/document.hpp"

#include <fstream>
#include <sstream>

#include "qoe/error.hpp"

namespace qoe::stacking {
namespace {

using json = nlohmann::ordered_json;
using learners::Algorithm;

json spec_to_json(const learners::RegressorSpec& spec) {
    json hp = json::object();
    for (const auto& [k, v] : spec.hyperparameters) hp[k] = v;
    return json{{"hyperparameters", hp}, {"seed", spec.seed}};
}

learners::RegressorSpec spec_from_json(Algorithm algorithm, const json& j) {
    std::map<std::string, double> hp;
    for (const auto& [k, v] : j.at("hyperparameters").items()) hp[k] = v.get<double>();
    try {
        return learners::RegressorSpec::make(algorithm, hp, j.at("seed").get<std::uint64_t>());
    } catch (const ConfigError& e) {
        throw TransferError(std::string("invalid hyperparameters in document: ") + e.what());
    }
}

json gbt_to_json(const learners::GbtModel& m) {
    json trees = json::array();
    for (const auto& t : m.trees) {
        json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
             value = json::array(), cover = json::array();
        for (const auto& n : t.nodes) {
            feature.push_back(n.feature);
            threshold.push_back(n.threshold);
            left.push_back(n.left);
            right.push_back(n.right);
            value.push_back(n.value);
            cover.push_back(n.cover);
        }
        trees.push_back(json{{"feature", feature}, {"threshold", threshold}, {"left", left},
                             {"right", right},     {"value", value},         {"cover", cover}});
    }
    return json{{"base_prediction", m.base_prediction},
                {"learning_rate", m.learning_rate},
                {"max_depth", m.max_depth},
                {"trees", trees}};
}

learners::GbtModel gbt_from_json(const json& j, const dataset::FeatureSchema& schema) {
    learners::GbtModel m;
    m.base_prediction = j.at("base_prediction").get<double>();
    m.learning_rate = j.at("learning_rate").get<double>();
    m.max_depth = j.at("max_depth").get<int>();
    m.feature_schema = schema;
    const int p = static_cast<int>(schema.size());
    for (const auto& t : j.at("trees")) {
        learners::DecisionTree tree;
        const auto& f = t.at("feature");
        const std::size_t n = f.size();
        for (const char* key : {"threshold", "left", "right", "value", "cover"}) {
            if (t.at(key).size() != n) throw TransferError("tree arrays differ in length");
        }
        for (std::size_t i = 0; i < n; ++i) {
            learners::TreeNode node{f[i].get<int>(),          t["threshold"][i].get<double>(),
                                    t["left"][i].get<int>(),  t["right"][i].get<int>(),
                                    t["value"][i].get<double>(), t["cover"][i].get<double>()};
            if (node.feature >= p) throw TransferError("tree node references feature outside the schema");
            if (!node.is_leaf() && (node.left <= static_cast<int>(i) || node.right <= static_cast<int>(i) ||
                                    node.left >= static_cast<int>(n) || node.right >= static_cast<int>(n))) {
                throw TransferError("tree node has invalid children");
            }
            tree.nodes.push_back(node);
        }
        if (tree.nodes.empty()) throw TransferError("empty tree in document");
        m.trees.push_back(std::move(tree));
    }
    return m;
}

json mlp_to_json(const learners::MlpModel& m) {
    return json{{"layer_sizes", m.layer_sizes},
                {"parameters", m.parameters},
                {"input_mean", m.input_mean},
                {"input_std", m.input_std},
                {"target_scale", m.target_scale}};
}

learners::MlpModel mlp_from_json(const json& j, const dataset::FeatureSchema& schema) {
    learners::MlpModel m;
    m.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    m.parameters = j.at("parameters").get<std::vector<double>>();
    m.input_mean = j.at("input_mean").get<std::vector<double>>();
    m.input_std = j.at("input_std").get<std::vector<double>>();
    m.target_scale = j.at("target_scale").get<double>();
    m.feature_schema = schema;
    if (m.layer_sizes.size() < 2 || m.layer_sizes.front() != schema.size() || m.layer_sizes.back() != 1 ||
        m.parameters.size() != learners::parameter_count(m.layer_sizes) || m.input_mean.size() != schema.size() ||
        m.input_std.size() != schema.size()) {
        throw TransferError("MLP parameters inconsistent with layer sizes or schema");
    }
    return m;
}

json tree_to_json(const learners::ModelTree& m) {
    json nodes = json::array();
    for (const auto& n : m.nodes) {
        nodes.push_back(json{{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right},
                             {"n_samples", n.n_samples},
                             {"intercept", n.model.intercept},
                             {"coefficients", n.model.coefficients},
                             {"intercept_only_fallback", n.model.intercept_only_fallback}});
    }
    return json{{"min_leaf", m.min_leaf},
                {"smoothing_k", m.smoothing_k},
                {"smoothing", m.smoothing},
                {"nodes", nodes}};
}

learners::ModelTree tree_from_json(const json& j, const dataset::FeatureSchema& schema) {
    learners::ModelTree m;
    m.min_leaf = j.at("min_leaf").get<std::size_t>();
    m.smoothing_k = j.at("smoothing_k").get<double>();
    m.smoothing = j.at("smoothing").get<bool>();
    m.feature_schema = schema;
    const auto& nodes = j.at("nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& n = nodes[i];
        learners::ModelTreeNode node;
        node.feature = n.at("feature").get<int>();
        node.threshold = n.at("threshold").get<double>();
        node.left = n.at("left").get<int>();
        node.right = n.at("right").get<int>();
        node.n_samples = n.at("n_samples").get<std::size_t>();
        node.model.intercept = n.at("intercept").get<double>();
        node.model.coefficients = n.at("coefficients").get<std::vector<double>>();
        node.model.intercept_only_fallback = n.at("intercept_only_fallback").get<bool>();
        if (node.model.coefficients.size() != schema.size() || node.feature >= static_cast<int>(schema.size())) {
            throw TransferError("model-tree node inconsistent with schema");
        }
        if (!node.is_leaf() && (node.left <= static_cast<int>(i) || node.right <= static_cast<int>(i) ||
                                node.left >= static_cast<int>(nodes.size()) ||
                                node.right >= static_cast<int>(nodes.size()))) {
            throw TransferError("model-tree node has invalid children");
        }
        m.nodes.push_back(std::move(node));
    }
    if (m.nodes.empty()) throw TransferError("empty model tree in document");
    return m;
}

std::string specific_names(const dataset::FeatureSchema& schema) {
    std::string out;
    for (const auto& n : schema.names_of(dataset::FeatureKind::kSpecific)) out += (out.empty() ? "" : ", ") + n;
    return out;
}

}  // namespace

json ModelDocument::to_json() const {
    json schema = json::array();
    for (const auto& e : feature_schema.entries()) {
        schema.push_back(json{{"name", e.name}, {"kind", std::string(dataset::to_string(e.kind))}});
    }
    return json{{"format_version", format_version},
                {"algorithm", std::string(learners::to_string(algorithm))},
                {"role", role == DocumentRole::kBase ? "base" : "local"},
                {"feature_schema", schema},
                {"target_scale", json{{"min", target_min}, {"max", target_max}}},
                {"params", params},
                {"provenance", provenance}};
}

std::string ModelDocument::serialize() const { return to_json().dump(2) + "\n"; }

ModelDocument ModelDocument::from_json(const json& j) {
    try {
        ModelDocument doc;
        doc.format_version = j.at("format_version").get<int>();
        if (doc.format_version != kFormatVersion) {
            throw TransferError("unsupported document format_version " + std::to_string(doc.format_version));
        }
        const auto algo = j.at("algorithm").get<std::string>();
        try {
            doc.algorithm = learners::algorithm_from_string(algo);
        } catch (const ConfigError&) {
            throw TransferError("unknown algorithm tag '" + algo + "'");
        }
        const auto role = j.at("role").get<std::string>();
        if (role != "base" && role != "local") throw TransferError("unknown document role '" + role + "'");
        doc.role = role == "base" ? DocumentRole::kBase : DocumentRole::kLocal;
        std::vector<dataset::FeatureSpec> specs;
        for (const auto& e : j.at("feature_schema")) {
            specs.push_back({e.at("name").get<std::string>(),
                             dataset::feature_kind_from_string(e.at("kind").get<std::string>())});
        }
        doc.feature_schema = dataset::FeatureSchema(std::move(specs));
        doc.target_min = j.at("target_scale").at("min").get<double>();
        doc.target_max = j.at("target_scale").at("max").get<double>();
        doc.params = j.at("params");
        doc.provenance = j.at("provenance").get<std::string>();
        if (doc.role == DocumentRole::kBase && !doc.feature_schema.generic_only()) {
            throw TransferError("base document carries specific features: " + specific_names(doc.feature_schema));
        }
        return doc;
    } catch (const nlohmann::json::exception& e) {
        throw TransferError(std::string("malformed model document: ") + e.what());
    } catch (const SchemaError& e) {
        throw TransferError(std::string("malformed feature schema in document: ") + e.what());
    }
}

ModelDocument ModelDocument::parse(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw TransferError(std::string("model document is not valid JSON: ") + e.what());
    }
    return from_json(j);
}

ModelDocument export_model(const learners::RegressorModel& model, bool as_base, std::string provenance) {
    const auto& schema = model.feature_schema();
    if (as_base && !schema.generic_only()) {
        throw TransferError("refusing to export a base model with specific features: " + specific_names(schema));
    }
    ModelDocument doc;
    doc.algorithm = model.algorithm();
    doc.role = as_base ? DocumentRole::kBase : DocumentRole::kLocal;
    doc.feature_schema = schema;
    doc.provenance = std::move(provenance);
    json params = std::visit(
        [](const auto& m) -> json {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, learners::GbtModel>) {
                return gbt_to_json(m);
            } else if constexpr (std::is_same_v<T, learners::MlpModel>) {
                return mlp_to_json(m);
            } else {
                return tree_to_json(m);
            }
        },
        model.impl());
    doc.params = json{{"spec", spec_to_json(model.spec())}};
    for (auto& [k, v] : params.items()) doc.params[k] = v;
    return doc;
}

learners::RegressorModel import_model(const ModelDocument& doc) {
    if (doc.format_version != kFormatVersion) {
        throw TransferError("unsupported document format_version " + std::to_string(doc.format_version));
    }
    if (doc.role == DocumentRole::kBase && !doc.feature_schema.generic_only()) {
        throw TransferError("base document carries specific features: " + specific_names(doc.feature_schema));
    }
    try {
        auto spec = spec_from_json(doc.algorithm, doc.params.at("spec"));
        switch (doc.algorithm) {
            case Algorithm::kGbt: return {std::move(spec), gbt_from_json(doc.params, doc.feature_schema)};
            case Algorithm::kMlp: return {std::move(spec), mlp_from_json(doc.params, doc.feature_schema)};
            case Algorithm::kModelTree: return {std::move(spec), tree_from_json(doc.params, doc.feature_schema)};
        }
    } catch (const nlohmann::json::exception& e) {
        throw TransferError(std::string("malformed model parameters: ") + e.what());
    }
    throw TransferError("unknown algorithm");
}

learners::RegressorModel import_model(const ModelDocument& doc, const dataset::FeatureSchema& local_schema) {
    return import_model(doc).bind_input(local_schema);
}

void write_document(const std::filesystem::path& path, const ModelDocument& doc) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write " + tmp.string());
        out << doc.serialize();
        if (!out) throw DataError("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

ModelDocument read_document(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model document " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ModelDocument::parse(ss.str());
}

}  // namespace qoe::stacking
