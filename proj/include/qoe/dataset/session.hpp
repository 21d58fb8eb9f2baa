#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qoe/dataset/dataset.hpp"

namespace qoe::dataset {

/// One subject-rated streaming session.
struct SessionRecord {
    std::string session_id;
    std::string content_id;
    double ti = 0.0;
    double si = 0.0;
    double fps = 0.0;
    std::vector<double> segment_bitrates;  // Mbps, one per played segment
    double initial_stall_s = 0.0;
    std::vector<double> intermediate_stalls;  // seconds
    double mos = 0.0;  // [0, 100]
};

/// Exact header of a session CSV.
inline constexpr const char* kSessionHeader =
    "session_id,content_id,ti,si,fps,segment_bitrates,initial_stall_s,intermediate_stalls,mos";

/// Throws ValidationError describing the first violated invariant.
void validate(const SessionRecord& session);

/// Parses a session CSV. List-valued cells hold semicolon-separated numbers.
/// Row numbers in errors are 1-based data rows (the header is row 0).
std::vector<SessionRecord> parse_sessions(std::istream& in);
std::vector<SessionRecord> load_sessions(const std::filesystem::path& path);

void write_sessions(std::ostream& out, const std::vector<SessionRecord>& sessions);

/// The nine standard features in the order of qoe_feature_schema(), labelled with MOS.
FeatureVector extract_features(const SessionRecord& session);
Dataset extract_dataset(const std::vector<SessionRecord>& sessions, std::string provenance);

/// Ordinary-least-squares slope of values against their index; 0 for one value.
double index_slope(const std::vector<double>& values);

}  // namespace qoe::dataset
