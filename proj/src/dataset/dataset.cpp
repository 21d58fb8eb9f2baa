#include "qoe/dataset/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "qoe/dataset/csv.hpp"
#include "qoe/dataset/session.hpp"
#include "qoe/error.hpp"
#include "qoe/random.hpp"

namespace qoe::dataset {

std::vector<double> Dataset::labels() const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.label);
    return out;
}

std::vector<double> Dataset::column(std::size_t j) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.values.at(j));
    return out;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices, std::string prov) const {
    Dataset out{schema, {}, std::move(prov)};
    out.rows.reserve(indices.size());
    for (std::size_t i : indices) out.rows.push_back(rows.at(i));
    return out;
}

void check_conforms(const Dataset& data) {
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const auto& r = data.rows[i];
        if (r.values.size() != data.schema.size()) {
            throw SchemaError("row " + std::to_string(i) + " has " + std::to_string(r.values.size()) +
                              " values, schema has " + std::to_string(data.schema.size()));
        }
        for (std::size_t j = 0; j < r.values.size(); ++j) {
            if (!std::isfinite(r.values[j])) {
                throw SchemaError("row " + std::to_string(i) + " feature '" + data.schema[j].name +
                                  "' is not finite");
            }
        }
        if (!std::isfinite(r.label)) throw SchemaError("row " + std::to_string(i) + " label is not finite");
    }
}

Dataset select_columns(const Dataset& data, const FeatureSchema& target) {
    std::vector<std::size_t> source;
    std::string missing;
    for (const auto& e : target.entries()) {
        const auto idx = data.schema.index_of(e.name);
        if (!idx) {
            missing += (missing.empty() ? "" : ", ") + e.name;
            continue;
        }
        source.push_back(*idx);
    }
    if (!missing.empty()) throw SchemaError("missing features: " + missing);

    Dataset out{target, {}, data.provenance};
    out.rows.reserve(data.rows.size());
    for (const auto& r : data.rows) {
        FeatureVector v;
        v.values.reserve(source.size());
        for (std::size_t j : source) v.values.push_back(r.values[j]);
        v.label = r.label;
        out.rows.push_back(std::move(v));
    }
    return out;
}

Dataset project_features(const Dataset& data, Projection keep) {
    if (keep == Projection::kAll) return data;
    Dataset out = select_columns(data, data.schema.generic_projection());
    out.provenance = data.provenance + "|generic";
    return out;
}

Split content_split(const Dataset& data, double ti_threshold, double si_threshold) {
    const auto ti = data.schema.index_of(feature::kTi);
    const auto si = data.schema.index_of(feature::kSi);
    if (!ti || !si) throw SchemaError("content split requires TI and SI columns");

    std::vector<std::size_t> low;
    std::vector<std::size_t> high;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const auto& v = data.rows[i].values;
        if (v[*ti] < ti_threshold && v[*si] < si_threshold) {
            low.push_back(i);
        } else {
            high.push_back(i);
        }
    }
    const std::string tag = "|content(" + csv::format_real(ti_threshold) + "," +
                            csv::format_real(si_threshold) + ")";
    return {data.subset(low, data.provenance + tag + ":g0"),
            data.subset(high, data.provenance + tag + ":g1")};
}

Split random_split(const Dataset& data, std::size_t g0_size, std::uint64_t seed) {
    if (g0_size == 0 || g0_size >= data.size()) {
        throw ValidationError("random split size " + std::to_string(g0_size) +
                              " must lie strictly between 0 and " + std::to_string(data.size()));
    }
    Rng rng(seed);
    const auto order = rng.permutation(data.size());
    const std::vector<std::size_t> a(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(g0_size));
    const std::vector<std::size_t> b(order.begin() + static_cast<std::ptrdiff_t>(g0_size), order.end());
    const std::string tag = "|random(" + std::to_string(g0_size) + ",seed=" + std::to_string(seed) + ")";
    return {data.subset(a, data.provenance + tag + ":g0"), data.subset(b, data.provenance + tag + ":g1")};
}

TrainTest train_test_split(const Dataset& data, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ValidationError("train fraction must lie in (0, 1)");
    }
    const auto n = data.size();
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 0.5));
    if (n_train == 0 || n_train >= n) {
        throw ValidationError("train/test split of " + std::to_string(n) + " rows at fraction " +
                              csv::format_real(train_fraction) + " leaves an empty side");
    }
    Rng rng(seed);
    const auto order = rng.permutation(n);
    const std::vector<std::size_t> a(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    const std::vector<std::size_t> b(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    const std::string tag = "|split(" + csv::format_real(train_fraction) + ",seed=" + std::to_string(seed) + ")";
    return {data.subset(a, data.provenance + tag + ":train"), data.subset(b, data.provenance + tag + ":test")};
}

void write_feature_table(std::ostream& out, const Dataset& data) {
    for (const auto& e : data.schema.entries()) out << csv::quote(e.name) << ',';
    out << kLabelColumn << '\n';
    for (const auto& r : data.rows) {
        for (double v : r.values) out << csv::format_real(v) << ',';
        out << csv::format_real(r.label) << '\n';
    }
}

void write_feature_table(const std::filesystem::path& path, const Dataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write_feature_table(out, data);
}

Dataset parse_feature_table(std::istream& in, std::string provenance) {
    const auto header_line = csv::next_line(in);
    if (!header_line) throw SchemaError("feature table is empty (missing header)");
    auto header = csv::split_record(*header_line);
    if (header.empty() || header.back() != kLabelColumn) {
        throw SchemaError("feature table header must end with column '" + std::string(kLabelColumn) + "'");
    }
    header.pop_back();
    std::vector<FeatureSpec> specs;
    for (auto& name : header) specs.push_back({name, standard_kind(name)});
    Dataset data{FeatureSchema(std::move(specs)), {}, std::move(provenance)};

    std::size_t row = 0;
    while (const auto line = csv::next_line(in)) {
        ++row;
        const auto cells = csv::split_record(*line);
        if (cells.size() != header.size() + 1) {
            throw ParseError(row, "expected " + std::to_string(header.size() + 1) + " cells, found " +
                                      std::to_string(cells.size()));
        }
        FeatureVector v;
        v.values.reserve(header.size());
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const auto x = csv::parse_real(cells[j]);
            const std::string& column = j < header.size() ? header[j] : std::string(kLabelColumn);
            if (!x) throw ParseError(row, "column '" + column + "': non-numeric value '" + cells[j] + "'");
            if (j < header.size()) {
                v.values.push_back(*x);
            } else {
                v.label = *x;
            }
        }
        if (!(v.label >= 0.0 && v.label <= 100.0)) {
            throw ValidationError("row " + std::to_string(row) + ": mos " + cells.back() + " outside [0, 100]");
        }
        data.rows.push_back(std::move(v));
    }
    return data;
}

Dataset load_feature_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open feature table " + path.string());
    return parse_feature_table(in, path.string());
}

Dataset load_any(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string first;
    std::getline(in, first);
    if (!first.empty() && first.back() == '\r') first.pop_back();
    const auto header = csv::split_record(first);
    const bool sessions = !header.empty() && header.front() == "session_id";
    in.clear();
    in.seekg(0);
    if (sessions) return extract_dataset(parse_sessions(in), path.string());
    return parse_feature_table(in, path.string());
}

}  // namespace qoe::dataset
