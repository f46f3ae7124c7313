#include "eef/ndarray.hpp"

#include "eef/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace eef {

std::size_t shape_product(std::span<const std::size_t> shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

NdArray::NdArray(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(shape_product(shape_), fill) {}

NdArray::NdArray(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_product(shape_)) {
        throw StructuralError("NdArray: " + std::to_string(data_.size()) +
                              " values do not fill shape " + shape_string());
    }
}

NdArray NdArray::reshaped(std::vector<std::size_t> shape) const {
    return NdArray(std::move(shape), data_);
}

void NdArray::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool NdArray::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string NdArray::shape_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape_[i]);
    }
    return s + ")";
}

} // namespace eef
