#pragma once

#include "eef/ndarray.hpp"

#include <memory>
#include <random>
#include <string>
#include <vector>

namespace eef {

enum class Activation { relu, tanh, sigmoid };

std::string to_string(Activation kind);

NdArray apply_activation(Activation kind, const NdArray& z);

/// Elementwise derivative of the activation with respect to its input.
NdArray activation_derivative(Activation kind, const NdArray& z);

// ---------------------------------------------------------------------------
// Parameter blocks. Shapes:
//   dense  W (out × in), b (out)
//   conv1d W (filters × kernel × in_channels), b (filters)
//   lstm   W (4·units × in), U (4·units × units), b (4·units), gate order i, f, g, o
// ---------------------------------------------------------------------------

struct DenseParams {
    NdArray W;
    NdArray b;
};

struct Conv1dParams {
    NdArray W;
    NdArray b;
};

struct LstmParams {
    NdArray W;
    NdArray U;
    NdArray b;

    std::size_t units() const { return b.size() / 4; }
    std::size_t input_size() const { return W.dim(1); }
};

/// z = W·y + b. `y` is a vector (in) or a batch (B × in).
NdArray dense_forward(const DenseParams& params, const NdArray& y);

/// Valid, stride-1 convolution. `input` is (len × channels) or (B × len × channels).
NdArray conv1d_forward(const Conv1dParams& params, const NdArray& input);

/// Non-overlapping max pooling along the length axis; a trailing partial window
/// is pooled over its actual length. `input` is (len × channels) or (B × len × channels).
NdArray maxpool1d(const NdArray& input, std::size_t pool);

struct LstmStep {
    NdArray h;
    NdArray c;
};

LstmStep lstm_cell(const NdArray& x, const NdArray& h_prev, const NdArray& c_prev,
                   const LstmParams& params);

/// Runs the cell over `sequence` (steps × features) from zero state. Returns
/// (steps × units) when `return_sequences`, else the final h (units).
NdArray lstm_layer_forward(const LstmParams& params, const NdArray& sequence,
                           bool return_sequences);

// ---------------------------------------------------------------------------
// Trainable layers. All tensors are batch-first.
// ---------------------------------------------------------------------------

struct Parameter {
    std::string name;
    NdArray* value = nullptr;
    NdArray* grad = nullptr;
};

class Layer {
public:
    virtual ~Layer() = default;

    virtual std::string kind() const = 0;

    /// Forward pass that records what backward() needs.
    virtual NdArray forward(const NdArray& input) = 0;

    /// Forward pass without side effects.
    virtual NdArray infer(const NdArray& input) const = 0;

    /// Accumulates parameter gradients and returns the gradient w.r.t. the input
    /// of the most recent forward().
    virtual NdArray backward(const NdArray& grad_output) = 0;

    virtual std::vector<Parameter> parameters() { return {}; }
    virtual void initialize(std::mt19937_64&) {}

    /// Per-sample output shape for a per-sample input shape.
    virtual std::vector<std::size_t> output_shape(const std::vector<std::size_t>& input) const = 0;
};

class DenseLayer final : public Layer {
public:
    DenseLayer(std::size_t in, std::size_t out);

    std::string kind() const override { return "dense"; }
    NdArray forward(const NdArray& input) override;
    NdArray infer(const NdArray& input) const override;
    NdArray backward(const NdArray& grad_output) override;
    std::vector<Parameter> parameters() override;
    void initialize(std::mt19937_64& rng) override;
    std::vector<std::size_t> output_shape(const std::vector<std::size_t>& input) const override;

    DenseParams& params() { return params_; }
    const DenseParams& params() const { return params_; }

private:
    DenseParams params_;
    DenseParams grads_;
    NdArray input_;
};

class ActivationLayer final : public Layer {
public:
    explicit ActivationLayer(Activation kind) : activation_(kind) {}

    std::string kind() const override { return to_string(activation_); }
    NdArray forward(const NdArray& input) override;
    NdArray infer(const NdArray& input) const override;
    NdArray backward(const NdArray& grad_output) override;
    std::vector<std::size_t> output_shape(const std::vector<std::size_t>& input) const override {
        return input;
    }

private:
    Activation activation_;
    NdArray input_;
};

class Conv1dLayer final : public Layer {
public:
    Conv1dLayer(std::size_t in_channels, std::size_t filters, std::size_t kernel);

    std::string kind() const override { return "conv1d"; }
    NdArray forward(const NdArray& input) override;
    NdArray infer(const NdArray& input) const override;
    NdArray backward(const NdArray& grad_output) override;
    std::vector<Parameter> parameters() override;
    void initialize(std::mt19937_64& rng) override;
    std::vector<std::size_t> output_shape(const std::vector<std::size_t>& input) const override;

    Conv1dParams& params() { return params_; }

private:
    Conv1dParams params_;
    Conv1dParams grads_;
    NdArray input_;
};

class MaxPool1dLayer final : public Layer {
public:
    explicit MaxPool1dLayer(std::size_t pool);

    std::string kind() const override { return "maxpool1d"; }
    NdArray forward(const NdArray& input) override;
    NdArray infer(const NdArray& input) const override;
    NdArray backward(const NdArray& grad_output) override;
    std::vector<std::size_t> output_shape(const std::vector<std::size_t>& input) const override;

private:
    std::size_t pool_;
    std::vector<std::size_t> input_shape_;
    std::vector<std::size_t> argmax_;
};

class FlattenLayer final : public Layer {
public:
    std::string kind() const override { return "flatten"; }
    NdArray forward(const NdArray& input) override;
    NdArray infer(const NdArray& input) const override;
    NdArray backward(const NdArray& grad_output) override;
    std::vector<std::size_t> output_shape(const std::vector<std::size_t>& input) const override;

private:
    std::vector<std::size_t> input_shape_;
};

class LstmLayer final : public Layer {
public:
    LstmLayer(std::size_t in, std::size_t units, bool return_sequences);

    std::string kind() const override { return "lstm"; }
    NdArray forward(const NdArray& input) override;
    NdArray infer(const NdArray& input) const override;
    NdArray backward(const NdArray& grad_output) override;
    std::vector<Parameter> parameters() override;
    void initialize(std::mt19937_64& rng) override;
    std::vector<std::size_t> output_shape(const std::vector<std::size_t>& input) const override;

    LstmParams& params() { return params_; }
    const LstmParams& params() const { return params_; }
    bool return_sequences() const { return return_sequences_; }

    /// Per-timestep activations kept for backpropagation through time.
    struct Cache {
        std::size_t batch = 0;
        std::size_t steps = 0;
        std::vector<double> x;      // steps × B × in
        std::vector<double> gates;  // steps × B × 4u (post-activation i, f, g, o)
        std::vector<double> c;      // (steps + 1) × B × u, c[0] = 0
        std::vector<double> h;      // (steps + 1) × B × u, h[0] = 0
        std::vector<double> tanh_c; // steps × B × u
    };

private:
    NdArray run(const NdArray& input, Cache* cache) const;

    LstmParams params_;
    LstmParams grads_;
    bool return_sequences_;
    Cache cache_;
};

/// Glorot-uniform: U(−a, a) with a = √(6 / (fan_in + fan_out)).
void glorot_uniform(NdArray& weights, std::size_t fan_in, std::size_t fan_out,
                    std::mt19937_64& rng);

} // namespace eef
