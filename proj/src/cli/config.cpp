#include "qoe/cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "qoe/error.hpp"
#include "toml.hpp"

namespace qoe::cli {
namespace {

using learners::Algorithm;

const std::vector<Algorithm> kAlgorithms = {Algorithm::kGbt, Algorithm::kMlp, Algorithm::kModelTree};

toml::table parse_toml(std::string_view text, std::string_view source) {
    try {
        return toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "invalid TOML in " << source << " at line " << e.source().begin.line << ": " << e.description();
        throw ConfigError(msg.str());
    }
}

std::vector<std::string> split_path(const std::string& dotted) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(dotted);
    while (std::getline(in, part, '.')) {
        if (part.empty()) throw ConfigError("malformed override key '" + dotted + "'");
        parts.push_back(part);
    }
    if (parts.empty()) throw ConfigError("empty override key");
    return parts;
}

void apply_override(toml::table& root, const std::string& override_text) {
    const auto eq = override_text.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + override_text + "' is not key=value");
    const auto parts = split_path(override_text.substr(0, eq));
    const std::string value_text = override_text.substr(eq + 1);

    toml::table* table = &root;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        auto* node = table->get(parts[i]);
        if (!node) {
            table->insert(parts[i], toml::table{});
            node = table->get(parts[i]);
        }
        table = node->as_table();
        if (!table) throw ConfigError("override key '" + parts[i] + "' is not a table");
    }
    try {
        auto parsed = toml::parse("v = " + value_text);
        table->insert_or_assign(parts.back(), std::move(*parsed.get("v")));
    } catch (const toml::parse_error&) {
        table->insert_or_assign(parts.back(), value_text);
    }
}

class Reader {
  public:
    Reader(const toml::table& table, std::string prefix) : table_(table), prefix_(std::move(prefix)) {}

    void finish() const {
        for (const auto& [key, node] : table_) {
            if (!seen_.count(std::string(key.str()))) {
                throw ConfigError("unknown config key '" + prefix_ + std::string(key.str()) + "'");
            }
        }
    }

    const toml::node* node(const std::string& key) {
        seen_.insert(key);
        return table_.get(key);
    }

    std::string where(const std::string& key) const { return "'" + prefix_ + key + "'"; }

    std::optional<double> real(const std::string& key) {
        const auto* n = node(key);
        if (!n) return std::nullopt;
        if (auto v = n->value<double>()) return *v;
        throw ConfigError(where(key) + " must be a number");
    }

    std::optional<std::int64_t> integer(const std::string& key) {
        const auto* n = node(key);
        if (!n) return std::nullopt;
        if (n->is_integer()) return n->value<std::int64_t>();
        throw ConfigError(where(key) + " must be an integer");
    }

    std::optional<std::size_t> count(const std::string& key) {
        auto v = integer(key);
        if (v && *v < 0) throw ConfigError(where(key) + " must be non-negative");
        if (!v) return std::nullopt;
        return static_cast<std::size_t>(*v);
    }

    std::optional<std::string> string(const std::string& key) {
        const auto* n = node(key);
        if (!n) return std::nullopt;
        if (auto v = n->value<std::string>()) return *v;
        throw ConfigError(where(key) + " must be a string");
    }

    std::optional<bool> boolean(const std::string& key) {
        const auto* n = node(key);
        if (!n) return std::nullopt;
        if (auto v = n->value<bool>()) return *v;
        throw ConfigError(where(key) + " must be a boolean");
    }

    const toml::table* table(const std::string& key) {
        const auto* n = node(key);
        if (!n) return nullptr;
        if (const auto* t = n->as_table()) return t;
        throw ConfigError(where(key) + " must be a table");
    }

    const toml::array* array(const std::string& key) {
        const auto* n = node(key);
        if (!n) return nullptr;
        if (const auto* a = n->as_array()) return a;
        throw ConfigError(where(key) + " must be an array");
    }

  private:
    const toml::table& table_;
    std::string prefix_;
    std::set<std::string> seen_;
};

dataset::Projection projection_from_string(const std::string& text) {
    if (text == "generic") return dataset::Projection::kGenericOnly;
    if (text == "all") return dataset::Projection::kAll;
    throw ConfigError("unknown feature projection '" + text + "' (expected generic or all)");
}

std::string_view to_string(dataset::Projection p) { return p == dataset::Projection::kAll ? "all" : "generic"; }

AlgorithmPair pair_from_string(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("stacking pair '" + text + "' is not base:local");
    return {learners::algorithm_from_string(text.substr(0, colon)),
            learners::algorithm_from_string(text.substr(colon + 1))};
}

RoleConfig read_role(Reader& parent, const std::string& key, RoleConfig role) {
    if (const auto* t = parent.table(key)) {
        Reader r(*t, key + ".");
        if (auto a = r.string("algorithm")) role.algorithm = learners::algorithm_from_string(*a);
        if (auto p = r.string("projection")) role.projection = projection_from_string(*p);
        r.finish();
    }
    return role;
}

std::filesystem::path resolve(const std::filesystem::path& base_dir, const std::string& p) {
    std::filesystem::path path(p);
    return (path.is_absolute() ? path : base_dir / path).lexically_normal();
}

}  // namespace

learners::RegressorSpec ExperimentConfig::spec_for(Algorithm algorithm, std::uint64_t seed_value) const {
    const auto it = hyperparameters.find(algorithm);
    static const std::map<std::string, double> kEmpty;
    return learners::RegressorSpec::make(algorithm, it == hyperparameters.end() ? kEmpty : it->second, seed_value);
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
    nlohmann::ordered_json j;
    j["dataset"] = dataset.generic_string();
    j["output_dir"] = output_dir.generic_string();
    j["seed"] = seed;
    j["repetitions"] = repetitions;
    j["train_fraction"] = train_fraction;
    j["primary_algorithm"] = learners::to_string(primary_algorithm);
    j["workers"] = workers;
    j["timing"] = timing;
    j["split"] = {{"mode", split.mode == SplitMode::kContent ? "content" : "random"},
                  {"ti_threshold", split.ti_threshold},
                  {"si_threshold", split.si_threshold},
                  {"g0_size", split.g0_size}};
    j["base"] = {{"algorithm", learners::to_string(base.algorithm)}, {"projection", to_string(base.projection)}};
    j["local"] = {{"algorithm", learners::to_string(local.algorithm)}, {"projection", to_string(local.projection)}};
    auto pairs = nlohmann::ordered_json::array();
    for (const auto& [b, l] : stacking.pairs) {
        pairs.push_back(std::string(learners::to_string(b)) + ":" + std::string(learners::to_string(l)));
    }
    j["stacking"] = {{"grid_step", stacking.grid_step}, {"pairs", pairs}};
    j["analysis"] = {{"ks_alpha", analysis.ks_alpha},
                     {"r2", analysis.r2 == analysis::RSquared::kPearson ? "pearson" : "determination"},
                     {"shap", analysis.shap},
                     {"shap_rows", analysis.shap_rows}};
    nlohmann::ordered_json hp;
    for (Algorithm a : kAlgorithms) {
        const auto spec = spec_for(a, 0);
        nlohmann::ordered_json values;
        for (const auto& [name, value] : spec.hyperparameters) values[name] = value;
        hp[std::string(learners::to_string(a))] = values;
    }
    j["hyperparameters"] = hp;
    return j;
}

ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides,
                              const std::filesystem::path& base_dir) {
    auto root = parse_toml(text, "config");
    for (const auto& o : overrides) apply_override(root, o);

    ExperimentConfig cfg;
    Reader r(root, "");

    auto seed = r.integer("seed");
    if (!seed) throw ConfigError("'seed' is required");
    if (*seed < 0) throw ConfigError("'seed' must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(*seed);

    auto data = r.string("dataset");
    if (!data) throw ConfigError("'dataset' is required");
    cfg.dataset = resolve(base_dir, *data);
    auto out = r.string("output_dir");
    if (!out) throw ConfigError("'output_dir' is required");
    cfg.output_dir = resolve(base_dir, *out);

    if (auto v = r.count("repetitions")) cfg.repetitions = *v;
    if (cfg.repetitions < 1) throw ConfigError("'repetitions' must be at least 1");
    if (auto v = r.real("train_fraction")) cfg.train_fraction = *v;
    if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
        throw ConfigError("'train_fraction' must lie in (0, 1)");
    }
    if (auto v = r.string("primary_algorithm")) cfg.primary_algorithm = learners::algorithm_from_string(*v);
    if (auto v = r.count("workers")) cfg.workers = *v;
    if (auto v = r.boolean("timing")) cfg.timing = *v;

    if (const auto* t = r.table("split")) {
        Reader s(*t, "split.");
        if (auto mode = s.string("mode")) {
            if (*mode == "content") {
                cfg.split.mode = SplitMode::kContent;
            } else if (*mode == "random") {
                cfg.split.mode = SplitMode::kRandom;
            } else {
                throw ConfigError("'split.mode' must be content or random");
            }
        }
        if (auto v = s.real("ti_threshold")) cfg.split.ti_threshold = *v;
        if (auto v = s.real("si_threshold")) cfg.split.si_threshold = *v;
        if (auto v = s.count("g0_size")) cfg.split.g0_size = *v;
        s.finish();
    }

    cfg.base = read_role(r, "base", cfg.base);
    cfg.local = read_role(r, "local", cfg.local);

    if (const auto* t = r.table("stacking")) {
        Reader s(*t, "stacking.");
        if (auto v = s.real("grid_step")) cfg.stacking.grid_step = *v;
        if (const auto* a = s.array("pairs")) {
            for (const auto& item : *a) {
                auto v = item.value<std::string>();
                if (!v) throw ConfigError("'stacking.pairs' entries must be strings");
                cfg.stacking.pairs.push_back(pair_from_string(*v));
            }
        }
        s.finish();
    }
    if (!(cfg.stacking.grid_step > 0.0 && cfg.stacking.grid_step <= 0.5)) {
        throw ConfigError("'stacking.grid_step' must lie in (0, 0.5]");
    }
    if (cfg.stacking.pairs.empty()) {
        for (Algorithm b : kAlgorithms) {
            for (Algorithm l : kAlgorithms) cfg.stacking.pairs.emplace_back(b, l);
        }
    }

    if (const auto* t = r.table("analysis")) {
        Reader s(*t, "analysis.");
        if (auto v = s.real("ks_alpha")) cfg.analysis.ks_alpha = *v;
        if (auto v = s.string("r2")) {
            if (*v == "pearson") {
                cfg.analysis.r2 = analysis::RSquared::kPearson;
            } else if (*v == "determination") {
                cfg.analysis.r2 = analysis::RSquared::kDetermination;
            } else {
                throw ConfigError("'analysis.r2' must be pearson or determination");
            }
        }
        if (auto v = s.boolean("shap")) cfg.analysis.shap = *v;
        if (auto v = s.count("shap_rows")) cfg.analysis.shap_rows = *v;
        s.finish();
    }
    if (!(cfg.analysis.ks_alpha > 0.0 && cfg.analysis.ks_alpha < 1.0)) {
        throw ConfigError("'analysis.ks_alpha' must lie in (0, 1)");
    }

    if (const auto* t = r.table("hyperparameters")) {
        Reader h(*t, "hyperparameters.");
        for (Algorithm a : kAlgorithms) {
            const std::string name(learners::to_string(a));
            const auto* sub = h.table(name);
            if (!sub) continue;
            auto& values = cfg.hyperparameters[a];
            for (const auto& [key, node] : *sub) {
                auto v = node.value<double>();
                if (!v) throw ConfigError("'hyperparameters." + name + "." + std::string(key.str()) + "' must be a number");
                values[std::string(key.str())] = *v;
            }
            // Validates names and ranges up front.
            (void)learners::RegressorSpec::make(a, values, 0);
        }
        h.finish();
    }

    r.finish();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    auto cfg = parse_config(text.str(), overrides, path.parent_path());
    if (!std::filesystem::is_regular_file(cfg.dataset)) {
        throw ConfigError("dataset file " + cfg.dataset.string() + " does not exist");
    }
    return cfg;
}

}  // namespace qoe::cli
