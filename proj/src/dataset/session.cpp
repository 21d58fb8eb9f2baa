#include "qoe/dataset/session.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include "qoe/dataset/csv.hpp"
#include "qoe/error.hpp"

namespace qoe::dataset {
namespace {

constexpr std::array<std::string_view, 9> kColumns = {
    "session_id", "content_id", "ti", "si", "fps",
    "segment_bitrates", "initial_stall_s", "intermediate_stalls", "mos"};

enum Column : std::size_t {
    kSessionId, kContentId, kTiCol, kSiCol, kFpsCol, kBitrates, kInitialStall, kStalls, kMos
};

std::vector<double> parse_list(std::string_view cell, std::size_t row, std::string_view column) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= cell.size()) {
        const std::size_t end = std::min(cell.find(';', start), cell.size());
        const auto item = cell.substr(start, end - start);
        if (!item.empty() && item.find_first_not_of(' ') != std::string_view::npos) {
            const auto v = csv::parse_real(item);
            if (!v) {
                throw ParseError(row, "column '" + std::string(column) + "': non-numeric list item '" +
                                          std::string(item) + "'");
            }
            out.push_back(*v);
        }
        start = end + 1;
    }
    return out;
}

double parse_cell(std::string_view cell, std::size_t row, std::string_view column) {
    const auto v = csv::parse_real(cell);
    if (!v) {
        throw ParseError(row, "column '" + std::string(column) + "': non-numeric value '" +
                                  std::string(cell) + "'");
    }
    return *v;
}

std::string join_list(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out.push_back(';');
        out += csv::format_real(values[i]);
    }
    return out;
}

}  // namespace

void validate(const SessionRecord& s) {
    if (!(s.mos >= 0.0 && s.mos <= 100.0)) {
        throw ValidationError("mos " + csv::format_real(s.mos) + " outside [0, 100]");
    }
    if (s.segment_bitrates.empty()) throw ValidationError("segment_bitrates is empty");
    for (double b : s.segment_bitrates) {
        if (!(b > 0.0)) throw ValidationError("segment bitrate " + csv::format_real(b) + " is not > 0");
    }
    if (!(s.initial_stall_s >= 0.0)) throw ValidationError("initial_stall_s is negative");
    for (double d : s.intermediate_stalls) {
        if (!(d > 0.0)) {
            throw ValidationError("intermediate stall duration " + csv::format_real(d) + " is not > 0");
        }
    }
    if (!(s.ti >= 0.0)) throw ValidationError("ti is negative");
    if (!(s.si >= 0.0)) throw ValidationError("si is negative");
    if (!(s.fps > 0.0)) throw ValidationError("fps is not > 0");
}

std::vector<SessionRecord> parse_sessions(std::istream& in) {
    const auto header_line = csv::next_line(in);
    if (!header_line) throw SchemaError("session file is empty (missing header)");
    const auto header = csv::split_record(*header_line);

    std::array<std::size_t, kColumns.size()> position{};
    for (std::size_t c = 0; c < kColumns.size(); ++c) {
        const auto it = std::find(header.begin(), header.end(), kColumns[c]);
        if (it == header.end()) {
            throw SchemaError("missing column '" + std::string(kColumns[c]) + "'");
        }
        position[c] = static_cast<std::size_t>(it - header.begin());
    }
    for (const auto& name : header) {
        if (std::find(kColumns.begin(), kColumns.end(), name) == kColumns.end()) {
            throw SchemaError("unexpected column '" + name + "'");
        }
    }
    if (header.size() != kColumns.size()) throw SchemaError("duplicate columns in header");

    std::vector<SessionRecord> sessions;
    std::size_t row = 0;
    while (const auto line = csv::next_line(in)) {
        ++row;
        const auto cells = csv::split_record(*line);
        if (cells.size() != kColumns.size()) {
            throw ParseError(row, "expected " + std::to_string(kColumns.size()) + " cells, found " +
                                      std::to_string(cells.size()));
        }
        auto cell = [&](Column c) -> const std::string& { return cells[position[c]]; };
        SessionRecord s;
        s.session_id = cell(kSessionId);
        s.content_id = cell(kContentId);
        s.ti = parse_cell(cell(kTiCol), row, kColumns[kTiCol]);
        s.si = parse_cell(cell(kSiCol), row, kColumns[kSiCol]);
        s.fps = parse_cell(cell(kFpsCol), row, kColumns[kFpsCol]);
        s.segment_bitrates = parse_list(cell(kBitrates), row, kColumns[kBitrates]);
        s.initial_stall_s = parse_cell(cell(kInitialStall), row, kColumns[kInitialStall]);
        s.intermediate_stalls = parse_list(cell(kStalls), row, kColumns[kStalls]);
        s.mos = parse_cell(cell(kMos), row, kColumns[kMos]);
        try {
            validate(s);
        } catch (const ValidationError& e) {
            throw ValidationError("row " + std::to_string(row) + ": " + e.what());
        }
        sessions.push_back(std::move(s));
    }
    return sessions;
}

std::vector<SessionRecord> load_sessions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open session file " + path.string());
    return parse_sessions(in);
}

void write_sessions(std::ostream& out, const std::vector<SessionRecord>& sessions) {
    out << kSessionHeader << '\n';
    for (const auto& s : sessions) {
        out << csv::quote(s.session_id) << ',' << csv::quote(s.content_id) << ','
            << csv::format_real(s.ti) << ',' << csv::format_real(s.si) << ','
            << csv::format_real(s.fps) << ",\"" << join_list(s.segment_bitrates) << "\","
            << csv::format_real(s.initial_stall_s) << ",\"" << join_list(s.intermediate_stalls)
            << "\"," << csv::format_real(s.mos) << '\n';
    }
}

double index_slope(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    // The centered index sums to zero, so any offset may be subtracted from
    // the values; using values[0] makes constant sequences give exactly 0.
    const double mean_i = static_cast<double>(n - 1) / 2.0;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double di = static_cast<double>(i) - mean_i;
        sxy += di * (values[i] - values[0]);
        sxx += di * di;
    }
    return sxy / sxx;
}

FeatureVector extract_features(const SessionRecord& s) {
    const auto& b = s.segment_bitrates;
    const double mean_bitrate =
        std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
    const double stall_total =
        std::accumulate(s.intermediate_stalls.begin(), s.intermediate_stalls.end(), 0.0);
    FeatureVector v;
    v.values = {s.ti,
                s.si,
                s.fps,
                static_cast<double>(s.intermediate_stalls.size()),
                stall_total,
                s.initial_stall_s,
                mean_bitrate,
                index_slope(b),
                b.back()};
    v.label = s.mos;
    return v;
}

Dataset extract_dataset(const std::vector<SessionRecord>& sessions, std::string provenance) {
    Dataset data{qoe_feature_schema(), {}, std::move(provenance)};
    data.rows.reserve(sessions.size());
    for (const auto& s : sessions) data.rows.push_back(extract_features(s));
    return data;
}

}  // namespace qoe::dataset
