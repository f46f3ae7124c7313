#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace eef {

/// Dense row-major array of doubles.
class NdArray {
public:
    NdArray() = default;
    explicit NdArray(std::vector<std::size_t> shape, double fill = 0.0);
    NdArray(std::vector<std::size_t> shape, std::vector<double> data);

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const noexcept { return data_.size(); }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    /// Same data, new shape with equal element count.
    NdArray reshaped(std::vector<std::size_t> shape) const;
    void fill(double value);
    bool all_finite() const;

    std::string shape_string() const;

    bool operator==(const NdArray&) const = default;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

std::size_t shape_product(std::span<const std::size_t> shape);

} // namespace eef
