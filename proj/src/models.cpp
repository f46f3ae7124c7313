#include "eef/models.hpp"

#include "eef/errors.hpp"

namespace eef {

std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::mlp: return "mlp";
    case ModelKind::cnn: return "cnn";
    case ModelKind::lstm: return "lstm";
    }
    return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
    if (name == "mlp") return ModelKind::mlp;
    if (name == "cnn") return ModelKind::cnn;
    if (name == "lstm") return ModelKind::lstm;
    throw UsageError("unknown model kind '" + name + "'");
}

void ModelSpec::validate() const {
    auto positive = [](std::size_t v, const char* what) {
        if (v == 0) throw StructuralError(std::string("model spec: ") + what + " must be >= 1");
    };
    positive(window_len, "window_len");
    positive(horizon, "horizon");
    positive(num_features, "num_features");
    switch (kind) {
    case ModelKind::mlp:
        if (mlp_hidden.empty()) throw StructuralError("model spec: mlp needs a hidden layer");
        for (auto w : mlp_hidden) positive(w, "mlp hidden width");
        break;
    case ModelKind::cnn:
        positive(cnn_filters, "cnn_filters");
        positive(cnn_kernel, "cnn_kernel");
        positive(cnn_pool, "cnn_pool");
        positive(cnn_dense, "cnn_dense");
        if (cnn_kernel > window_len) {
            throw StructuralError("model spec: kernel " + std::to_string(cnn_kernel) +
                                  " exceeds window " + std::to_string(window_len));
        }
        break;
    case ModelKind::lstm:
        if (lstm_units.empty()) throw StructuralError("model spec: lstm needs a layer");
        for (auto u : lstm_units) positive(u, "lstm units");
        break;
    }
}

nlohmann::json to_json(const ModelSpec& s) {
    nlohmann::json j{{"kind", to_string(s.kind)},
                     {"window_len", s.window_len},
                     {"horizon", s.horizon},
                     {"num_features", s.num_features}};
    switch (s.kind) {
    case ModelKind::mlp: j["mlp_hidden"] = s.mlp_hidden; break;
    case ModelKind::cnn:
        j["cnn_filters"] = s.cnn_filters;
        j["cnn_kernel"] = s.cnn_kernel;
        j["cnn_pool"] = s.cnn_pool;
        j["cnn_dense"] = s.cnn_dense;
        break;
    case ModelKind::lstm: j["lstm_units"] = s.lstm_units; break;
    }
    return j;
}

ModelSpec model_spec_from_json(const nlohmann::json& j, ModelSpec s) {
    if (j.contains("kind")) s.kind = parse_model_kind(j["kind"].get<std::string>());
    s.window_len = j.value("window_len", s.window_len);
    s.horizon = j.value("horizon", s.horizon);
    s.num_features = j.value("num_features", s.num_features);
    s.mlp_hidden = j.value("mlp_hidden", s.mlp_hidden);
    s.cnn_filters = j.value("cnn_filters", s.cnn_filters);
    s.cnn_kernel = j.value("cnn_kernel", s.cnn_kernel);
    s.cnn_pool = j.value("cnn_pool", s.cnn_pool);
    s.cnn_dense = j.value("cnn_dense", s.cnn_dense);
    s.lstm_units = j.value("lstm_units", s.lstm_units);
    return s;
}

Network build_mlp(const ModelSpec& spec) {
    ModelSpec s = spec;
    s.kind = ModelKind::mlp;
    s.validate();
    Network net({s.window_len, s.num_features});
    net.emplace<FlattenLayer>();
    std::size_t width = s.window_len * s.num_features;
    for (auto hidden : s.mlp_hidden) {
        net.emplace<DenseLayer>(width, hidden);
        net.emplace<ActivationLayer>(Activation::relu);
        width = hidden;
    }
    net.emplace<DenseLayer>(width, s.horizon);
    return net;
}

Network build_cnn(const ModelSpec& spec) {
    ModelSpec s = spec;
    s.kind = ModelKind::cnn;
    s.validate();
    Network net({s.window_len, s.num_features});
    net.emplace<Conv1dLayer>(s.num_features, s.cnn_filters, s.cnn_kernel);
    net.emplace<ActivationLayer>(Activation::relu);
    net.emplace<MaxPool1dLayer>(s.cnn_pool);
    net.emplace<FlattenLayer>();
    net.emplace<DenseLayer>(net.output_size(), s.cnn_dense);
    net.emplace<ActivationLayer>(Activation::relu);
    net.emplace<DenseLayer>(s.cnn_dense, s.horizon);
    return net;
}

Network build_lstm(const ModelSpec& spec) {
    ModelSpec s = spec;
    s.kind = ModelKind::lstm;
    s.validate();
    Network net({s.window_len, s.num_features});
    std::size_t in = s.num_features;
    for (std::size_t i = 0; i < s.lstm_units.size(); ++i) {
        const bool last = i + 1 == s.lstm_units.size();
        net.emplace<LstmLayer>(in, s.lstm_units[i], !last);
        in = s.lstm_units[i];
    }
    net.emplace<DenseLayer>(in, s.horizon);
    return net;
}

Network build_model(const ModelSpec& spec) {
    switch (spec.kind) {
    case ModelKind::mlp: return build_mlp(spec);
    case ModelKind::cnn: return build_cnn(spec);
    case ModelKind::lstm: return build_lstm(spec);
    }
    throw StructuralError("build_model: unknown kind");
}

Network make_model(const ModelSpec& spec, std::uint64_t seed) {
    Network net = build_model(spec);
    std::mt19937_64 rng(seed);
    net.initialize(rng);
    return net;
}

std::vector<double> predict(const Network& network, std::span<const double> window) {
    const std::size_t expected = shape_product(network.input_shape());
    if (window.size() != expected) {
        throw StructuralError("predict: window has " + std::to_string(window.size()) +
                              " values, network expects " + std::to_string(expected));
    }
    std::vector<std::size_t> shape{1};
    shape.insert(shape.end(), network.input_shape().begin(), network.input_shape().end());
    const NdArray out =
        network.predict(NdArray(std::move(shape), std::vector<double>(window.begin(), window.end())));
    return {out.values().begin(), out.values().end()};
}

} // namespace eef
