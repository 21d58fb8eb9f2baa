#include "qoe/cli/report_io.hpp"

#include <cmath>
#include <fstream>

#include "qoe/dataset/csv.hpp"
#include "qoe/error.hpp"

namespace qoe::cli {

namespace fs = std::filesystem;

std::string cell(double value) { return std::isnan(value) ? "n/a" : dataset::csv::format_real(value); }

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw Error("CSV row width does not match its header");
    rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
    std::string out;
    auto emit = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += dataset::csv::quote(cells[i]);
        }
        out += '\n';
    };
    emit(header_);
    for (const auto& r : rows_) emit(r);
    return out;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error("failed writing " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

StagingDir::StagingDir(fs::path target) : target_(std::move(target)) {
    if (fs::exists(target_)) {
        if (!fs::is_directory(target_)) throw ConfigError("output path " + target_.string() + " is not a directory");
        if (!fs::is_empty(target_) && !fs::exists(target_ / "report.json")) {
            throw ConfigError("output directory " + target_.string() + " is not empty and holds no previous report");
        }
    }
    staging_ = target_;
    staging_ += ".partial";
    fs::remove_all(staging_);
    fs::create_directories(staging_);
}

StagingDir::~StagingDir() {
    if (!committed_) {
        std::error_code ec;
        fs::remove_all(staging_, ec);
    }
}

void StagingDir::write(const std::string& relative, const std::string& text) const {
    write_text_atomic(staging_ / relative, text);
}

void StagingDir::commit() {
    fs::remove_all(target_);
    fs::rename(staging_, target_);
    committed_ = true;
}

}  // namespace qoe::cli
