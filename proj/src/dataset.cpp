#include "eef/dataset.hpp"

#include "eef/errors.hpp"
#include "eef/io.hpp"

#include <algorithm>

namespace eef {

double MinMaxScaler::transform(double value) const {
    return lo + (value - x_min) * (hi - lo) / (x_max - x_min);
}

double MinMaxScaler::inverse_transform(double value) const {
    return x_min + (value - lo) * (x_max - x_min) / (hi - lo);
}

std::vector<double> MinMaxScaler::transform(std::span<const double> values) const {
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(),
                   [this](double v) { return transform(v); });
    return out;
}

std::vector<double> MinMaxScaler::inverse_transform(std::span<const double> values) const {
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(),
                   [this](double v) { return inverse_transform(v); });
    return out;
}

SeriesSplit split(std::span<const double> series, std::size_t n_train, std::size_t n_test) {
    if (n_train + n_test > series.size()) {
        throw DomainError("split: need " + std::to_string(n_train + n_test) + " samples, have " +
                          std::to_string(series.size()));
    }
    SeriesSplit out;
    out.train.assign(series.begin(), series.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.assign(series.begin() + static_cast<std::ptrdiff_t>(n_train),
                    series.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
    return out;
}

MinMaxScaler fit_scaler(std::span<const double> series, double lo, double hi) {
    if (!(hi > lo)) throw DomainError("fit_scaler: hi must exceed lo");
    if (series.empty()) throw DomainError("fit_scaler: empty series");
    const auto [mn, mx] = std::minmax_element(series.begin(), series.end());
    if (!(*mx > *mn)) throw DomainError("fit_scaler: degenerate range (constant series)");
    return {*mn, *mx, lo, hi};
}

SupervisedDataset frame_supervised(std::span<const double> series, std::size_t window_len,
                                   std::size_t horizon) {
    if (window_len == 0 || horizon == 0) {
        throw DomainError("frame_supervised: window and horizon must be >= 1");
    }
    if (series.size() <= window_len + horizon - 1) {
        throw DomainError("frame_supervised: series of length " + std::to_string(series.size()) +
                          " too short for window " + std::to_string(window_len) +
                          " and horizon " + std::to_string(horizon));
    }
    SupervisedDataset ds;
    ds.window_len = window_len;
    ds.horizon = horizon;
    ds.num_features = 1;
    ds.num_pairs = series.size() - window_len - horizon + 1;
    ds.inputs.reserve(ds.num_pairs * window_len);
    ds.targets.reserve(ds.num_pairs * horizon);
    for (std::size_t i = 0; i < ds.num_pairs; ++i) {
        ds.inputs.insert(ds.inputs.end(), series.begin() + static_cast<std::ptrdiff_t>(i),
                         series.begin() + static_cast<std::ptrdiff_t>(i + window_len));
        ds.targets.insert(ds.targets.end(),
                          series.begin() + static_cast<std::ptrdiff_t>(i + window_len),
                          series.begin() + static_cast<std::ptrdiff_t>(i + window_len + horizon));
    }
    return ds;
}

std::vector<double> unframe(const SupervisedDataset& ds) {
    if (ds.num_features != 1) throw DomainError("unframe: dataset is parameter-augmented");
    if (ds.num_pairs == 0) return {};
    std::vector<double> series;
    series.reserve(ds.num_pairs + ds.window_len + ds.horizon - 1);
    for (std::size_t i = 0; i < ds.num_pairs; ++i) series.push_back(ds.input(i)[0]);
    const auto last_in = ds.input(ds.num_pairs - 1);
    series.insert(series.end(), last_in.begin() + 1, last_in.end());
    const auto last_out = ds.target(ds.num_pairs - 1);
    series.insert(series.end(), last_out.begin(), last_out.end());
    return series;
}

SupervisedDataset augment_with_parameter(const SupervisedDataset& ds, double parameter) {
    if (ds.num_features != 1) throw DomainError("augment_with_parameter: already augmented");
    SupervisedDataset out = ds;
    out.num_features = 2;
    out.inputs.clear();
    out.inputs.reserve(ds.inputs.size() * 2);
    for (double v : ds.inputs) {
        out.inputs.push_back(v);
        out.inputs.push_back(parameter);
    }
    return out;
}

SupervisedDataset concatenate(std::span<const SupervisedDataset> parts) {
    if (parts.empty()) throw DomainError("concatenate: nothing to concatenate");
    SupervisedDataset out;
    out.window_len = parts[0].window_len;
    out.horizon = parts[0].horizon;
    out.num_features = parts[0].num_features;
    for (const auto& p : parts) {
        if (p.window_len != out.window_len || p.horizon != out.horizon ||
            p.num_features != out.num_features) {
            throw DomainError("concatenate: incompatible dataset layouts");
        }
        out.inputs.insert(out.inputs.end(), p.inputs.begin(), p.inputs.end());
        out.targets.insert(out.targets.end(), p.targets.begin(), p.targets.end());
        out.num_pairs += p.num_pairs;
    }
    return out;
}

std::string dataset_csv(const SupervisedDataset& ds) {
    CsvTable table;
    for (std::size_t i = 0; i < ds.input_stride(); ++i) table.header.push_back("in_" + std::to_string(i));
    for (std::size_t i = 0; i < ds.horizon; ++i) table.header.push_back("out_" + std::to_string(i));
    table.rows.reserve(ds.num_pairs);
    for (std::size_t p = 0; p < ds.num_pairs; ++p) {
        std::vector<double> row(ds.input(p).begin(), ds.input(p).end());
        row.insert(row.end(), ds.target(p).begin(), ds.target(p).end());
        table.rows.push_back(std::move(row));
    }
    return to_csv(table);
}

SupervisedDataset parse_dataset_csv(const std::string& text, std::size_t window_len,
                                    std::size_t num_features) {
    const CsvTable table = parse_csv(text);
    const std::size_t n_in = window_len * num_features;
    if (n_in == 0 || table.header.size() <= n_in) {
        throw DomainError("parse_dataset_csv: column count does not match window/features");
    }
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        const std::string expect =
            i < n_in ? "in_" + std::to_string(i) : "out_" + std::to_string(i - n_in);
        if (table.header[i] != expect) {
            throw DomainError("parse_dataset_csv: unexpected column '" + table.header[i] + "'");
        }
    }
    SupervisedDataset ds;
    ds.window_len = window_len;
    ds.num_features = num_features;
    ds.horizon = table.header.size() - n_in;
    ds.num_pairs = table.rows.size();
    for (const auto& row : table.rows) {
        ds.inputs.insert(ds.inputs.end(), row.begin(), row.begin() + static_cast<std::ptrdiff_t>(n_in));
        ds.targets.insert(ds.targets.end(), row.begin() + static_cast<std::ptrdiff_t>(n_in), row.end());
    }
    return ds;
}

} // namespace eef
