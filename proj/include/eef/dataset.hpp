#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace eef {

/// Affine min-max rescaling of [x_min, x_max] onto [lo, hi]. Values outside the
/// fitted range extrapolate; nothing is clamped.
struct MinMaxScaler {
    double x_min = 0.0;
    double x_max = 1.0;
    double lo = -1.0;
    double hi = 1.0;

    double transform(double value) const;
    double inverse_transform(double value) const;
    std::vector<double> transform(std::span<const double> values) const;
    std::vector<double> inverse_transform(std::span<const double> values) const;
};

/// Supervised pairs. `inputs` is row-major (num_pairs × window_len × num_features),
/// `targets` is (num_pairs × horizon).
struct SupervisedDataset {
    std::vector<double> inputs;
    std::vector<double> targets;
    std::size_t num_pairs = 0;
    std::size_t window_len = 0;
    std::size_t horizon = 0;
    std::size_t num_features = 1;

    std::size_t input_stride() const { return window_len * num_features; }
    std::span<const double> input(std::size_t pair) const {
        return {inputs.data() + pair * input_stride(), input_stride()};
    }
    std::span<const double> target(std::size_t pair) const {
        return {targets.data() + pair * horizon, horizon};
    }
};

struct SeriesSplit {
    std::vector<double> train;
    std::vector<double> test;
};

/// Contiguous split: the first n_train values, then the next n_test.
SeriesSplit split(std::span<const double> series, std::size_t n_train, std::size_t n_test);

MinMaxScaler fit_scaler(std::span<const double> series, double lo = -1.0, double hi = 1.0);

/// Stride-1 sliding window. Pair i maps series[i, i+window_len) to
/// series[i+window_len, i+window_len+horizon).
SupervisedDataset frame_supervised(std::span<const double> series, std::size_t window_len,
                                   std::size_t horizon);

/// Recovers the series a single-feature dataset was framed from.
std::vector<double> unframe(const SupervisedDataset& dataset);

/// Appends `parameter` as a constant second feature at every input step.
SupervisedDataset augment_with_parameter(const SupervisedDataset& dataset, double parameter);

/// Concatenates datasets with identical window/horizon/feature layout.
SupervisedDataset concatenate(std::span<const SupervisedDataset> parts);

/// CSV with columns in_0..in_{w·f−1},out_0..out_{h−1}, one row per pair.
std::string dataset_csv(const SupervisedDataset& dataset);
SupervisedDataset parse_dataset_csv(const std::string& text, std::size_t window_len,
                                    std::size_t num_features);

} // namespace eef
