#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace patchbeam {

/// Dense 2D array addressed as (i, j) = (column along the beam, row across
/// it). Storage is row-major with j outer and i inner, which is also the
/// order used by every export format.
class Array2D {
public:
    Array2D() = default;
    Array2D(int cols, int rows, double fill = 0.0)
        : cols_(cols), rows_(rows),
          data_(static_cast<std::size_t>(cols) * static_cast<std::size_t>(rows), fill) {}

    [[nodiscard]] int cols() const noexcept { return cols_; }
    [[nodiscard]] int rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    double& operator()(int i, int j) noexcept { return data_[index(i, j)]; }
    double operator()(int i, int j) const noexcept { return data_[index(i, j)]; }

    [[nodiscard]] std::span<double> flat() noexcept { return data_; }
    [[nodiscard]] std::span<const double> flat() const noexcept { return data_; }

    [[nodiscard]] bool same_shape(const Array2D& o) const noexcept {
        return cols_ == o.cols_ && rows_ == o.rows_;
    }

    bool operator==(const Array2D&) const = default;

private:
    [[nodiscard]] std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(cols_) +
               static_cast<std::size_t>(i);
    }

    int cols_ = 0;
    int rows_ = 0;
    std::vector<double> data_;
};

}  // namespace patchbeam
