#pragma once

#include "eef/network.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace eef {

enum class ModelKind { mlp, cnn, lstm };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/// Architecture hyperparameters. Defaults reproduce the three baseline
/// forecasters: MLP 8-8, CNN conv(64, k=1)/pool 2/dense 50, LSTM 32-32.
struct ModelSpec {
    ModelKind kind = ModelKind::mlp;
    std::size_t window_len = 1;
    std::size_t horizon = 1;
    std::size_t num_features = 1;

    std::vector<std::size_t> mlp_hidden{8, 8};

    std::size_t cnn_filters = 64;
    std::size_t cnn_kernel = 1;
    std::size_t cnn_pool = 2;
    std::size_t cnn_dense = 50;

    std::vector<std::size_t> lstm_units{32, 32};

    /// Throws StructuralError when a size is zero or the kernel exceeds the window.
    void validate() const;
};

nlohmann::json to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j, ModelSpec base = {});

/// flatten → [dense(width) + ReLU]* → dense(horizon)
Network build_mlp(const ModelSpec& spec);

/// conv1d(filters, kernel) + ReLU → maxpool(pool) → flatten → dense(width) + ReLU → dense(horizon)
Network build_cnn(const ModelSpec& spec);

/// lstm(units₀, sequences) → … → lstm(unitsₙ, final state) → dense(horizon)
Network build_lstm(const ModelSpec& spec);

Network build_model(const ModelSpec& spec);

/// Builds and Glorot-initializes from a seed.
Network make_model(const ModelSpec& spec, std::uint64_t seed);

/// Forward pass on one flattened window (window_len·num_features values);
/// returns `horizon` normalized outputs.
std::vector<double> predict(const Network& network, std::span<const double> window);

} // namespace eef
