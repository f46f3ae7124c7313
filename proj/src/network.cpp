#include "eef/network.hpp"

#include "eef/errors.hpp"

#include <cmath>

namespace eef {

Network::Network(std::vector<std::size_t> input_shape)
    : input_shape_(std::move(input_shape)), output_shape_(input_shape_) {
    if (input_shape_.empty() || shape_product(input_shape_) == 0) {
        throw StructuralError("network: input shape must be non-empty");
    }
}

Network& Network::add(std::unique_ptr<Layer> layer) {
    output_shape_ = layer->output_shape(output_shape_);
    layers_.push_back(std::move(layer));
    return *this;
}

std::size_t Network::output_size() const { return shape_product(output_shape_); }

NdArray Network::check_input(const NdArray& batch) const {
    if (batch.rank() == input_shape_.size() + 1 &&
        std::equal(input_shape_.begin(), input_shape_.end(), batch.shape().begin() + 1)) {
        return batch;
    }
    // Accept any batch whose per-sample element count matches, e.g. flat rows.
    const std::size_t per_sample = shape_product(input_shape_);
    if (batch.rank() >= 1 && batch.dim(0) > 0 && batch.size() == batch.dim(0) * per_sample) {
        std::vector<std::size_t> shape{batch.dim(0)};
        shape.insert(shape.end(), input_shape_.begin(), input_shape_.end());
        return batch.reshaped(std::move(shape));
    }
    std::string expect = "(B";
    for (auto d : input_shape_) expect += "x" + std::to_string(d);
    throw StructuralError("network: input " + batch.shape_string() + " does not match " + expect +
                          ")");
}

NdArray Network::forward(const NdArray& batch) {
    NdArray x = check_input(batch);
    for (auto& layer : layers_) x = layer->forward(x);
    return x;
}

NdArray Network::predict(const NdArray& batch) const {
    NdArray x = check_input(batch);
    for (const auto& layer : layers_) x = layer->infer(x);
    return x;
}

NdArray Network::backward(const NdArray& grad_output) {
    NdArray g = grad_output;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        g = layers_[i]->backward(g);
        for (const auto& p : layers_[i]->parameters()) {
            if (!p.grad->all_finite()) {
                throw NumericError("non-finite gradient in layer " + std::to_string(i) + " (" +
                                   layers_[i]->kind() + ") parameter " + p.name);
            }
        }
        if (!g.all_finite()) {
            throw NumericError("non-finite input gradient from layer " + std::to_string(i) +
                               " (" + layers_[i]->kind() + ")");
        }
    }
    return g;
}

void Network::zero_grad() {
    for (auto& p : parameters()) p.grad->fill(0.0);
}

std::vector<Parameter> Network::parameters() {
    std::vector<Parameter> all;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        for (auto p : layers_[i]->parameters()) {
            p.name = std::to_string(i) + "_" + layers_[i]->kind() + "." + p.name;
            all.push_back(p);
        }
    }
    return all;
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) {
        // parameters() is non-const because it hands out mutable pointers.
        for (const auto& p : const_cast<Layer&>(*layer).parameters()) n += p.value->size();
    }
    return n;
}

void Network::initialize(std::mt19937_64& rng) {
    for (auto& layer : layers_) layer->initialize(rng);
}

nlohmann::json Network::checkpoint() const {
    nlohmann::json manifest;
    manifest["format"] = "eef-weights/1";
    manifest["parameters"] = nlohmann::json::array();
    for (const auto& p : const_cast<Network&>(*this).parameters()) {
        manifest["parameters"].push_back(
            {{"name", p.name}, {"shape", p.value->shape()},
             {"data", std::vector<double>(p.value->values().begin(), p.value->values().end())}});
    }
    return manifest;
}

void Network::load_checkpoint(const nlohmann::json& manifest) {
    if (manifest.value("format", "") != "eef-weights/1") {
        throw StructuralError("checkpoint: unknown format");
    }
    auto params = parameters();
    const auto& stored = manifest.at("parameters");
    if (stored.size() != params.size()) {
        throw StructuralError("checkpoint: expected " + std::to_string(params.size()) +
                              " parameter arrays, found " + std::to_string(stored.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& entry = stored[i];
        const auto name = entry.at("name").get<std::string>();
        const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
        if (name != params[i].name || shape != params[i].value->shape()) {
            throw StructuralError("checkpoint: parameter " + name + " does not match " +
                                  params[i].name + params[i].value->shape_string());
        }
        *params[i].value = NdArray(shape, entry.at("data").get<std::vector<double>>());
    }
}

double mse_loss(const NdArray& pred, const NdArray& actual) {
    if (pred.size() != actual.size() || pred.size() == 0) {
        throw StructuralError("mse_loss: shape mismatch " + pred.shape_string() + " vs " +
                              actual.shape_string());
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - actual[i];
        sum += d * d;
    }
    return sum / static_cast<double>(pred.size());
}

NdArray mse_gradient(const NdArray& pred, const NdArray& actual) {
    if (pred.size() != actual.size() || pred.size() == 0) {
        throw StructuralError("mse_gradient: shape mismatch");
    }
    NdArray g(pred.shape());
    const double scale = 2.0 / static_cast<double>(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) g[i] = scale * (pred[i] - actual[i]);
    return g;
}

double backward(Network& network, const NdArray& inputs, const NdArray& targets) {
    network.zero_grad();
    const NdArray pred = network.forward(inputs);
    const double loss = mse_loss(pred, targets);
    network.backward(mse_gradient(pred, targets));
    return loss;
}

} // namespace eef
