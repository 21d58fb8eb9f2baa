#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qoe/dataset/dataset.hpp"

namespace qoe::learners {

/// Dense row-major feature matrix.
class FeatureMatrix {
  public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    static FeatureMatrix from(const dataset::Dataset& data) {
        FeatureMatrix m(data.size(), data.schema.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            const auto& v = data.rows[i].values;
            std::copy(v.begin(), v.end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * m.cols_));
        }
        return m;
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    [[nodiscard]] std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace qoe::learners
