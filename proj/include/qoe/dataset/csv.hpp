#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qoe::dataset::csv {

/// Splits one CSV record honoring double-quoted cells ("" escapes a quote).
std::vector<std::string> split_record(std::string_view line);

/// Reads the next non-empty line, stripping a trailing CR.
std::optional<std::string> next_line(std::istream& in);

/// Parses a whole cell as a finite double; nullopt otherwise.
std::optional<double> parse_real(std::string_view text);

/// Shortest representation that round-trips to the same double.
std::string format_real(double value);

/// Quotes the cell when it contains a comma, quote or semicolon.
std::string quote(std::string_view cell);

}  // namespace qoe::dataset::csv
