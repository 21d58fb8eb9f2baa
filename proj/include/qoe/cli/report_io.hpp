#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace qoe::cli {

/// Numeric cell text: shortest round-trip form, "n/a" for NaN.
std::string cell(double value);

/// Builds CSV text row by row.
class CsvTable {
  public:
    explicit CsvTable(std::vector<std::string> header);

    void add(std::vector<std::string> row);
    [[nodiscard]] std::string str() const;

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Writes through a temporary sibling file and renames it into place.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

/// A scratch directory beside `target` that replaces `target` on commit()
/// and is removed otherwise. An existing non-empty `target` is only
/// replaced when it holds a previous report (a report.json file).
class StagingDir {
  public:
    explicit StagingDir(std::filesystem::path target);
    StagingDir(const StagingDir&) = delete;
    StagingDir& operator=(const StagingDir&) = delete;
    ~StagingDir();

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return staging_; }
    void write(const std::string& relative, const std::string& text) const;
    void commit();

  private:
    std::filesystem::path target_;
    std::filesystem::path staging_;
    bool committed_ = false;
};

}  // namespace qoe::cli
