#pragma once

#include "eef/layers.hpp"

#include <json.hpp>

#include <memory>
#include <random>
#include <string>
#include <vector>

namespace eef {

/// A sequential stack of layers. Inputs are batch-first with the per-sample
/// shape fixed at construction.
class Network {
public:
    explicit Network(std::vector<std::size_t> input_shape);

    Network(Network&&) noexcept = default;
    Network& operator=(Network&&) noexcept = default;

    Network& add(std::unique_ptr<Layer> layer);

    template <typename L, typename... Args>
    Network& emplace(Args&&... args) {
        return add(std::make_unique<L>(std::forward<Args>(args)...));
    }

    const std::vector<std::size_t>& input_shape() const { return input_shape_; }
    const std::vector<std::size_t>& output_shape() const { return output_shape_; }
    std::size_t output_size() const;
    std::size_t layer_count() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_.at(i); }
    const Layer& layer(std::size_t i) const { return *layers_.at(i); }

    /// Training forward pass; caches activations for backward().
    NdArray forward(const NdArray& batch);

    /// Read-only forward pass; safe to call concurrently on a frozen network.
    NdArray predict(const NdArray& batch) const;

    /// Back-propagates dLoss/dOutput through every layer, accumulating
    /// parameter gradients. Throws NumericError naming the first layer whose
    /// gradients are non-finite. Returns dLoss/dInput.
    NdArray backward(const NdArray& grad_output);

    void zero_grad();
    std::vector<Parameter> parameters();
    std::size_t parameter_count() const;

    void initialize(std::mt19937_64& rng);

    /// JSON manifest {"format": "eef-weights/1", "parameters": [{name, shape, data}]}.
    nlohmann::json checkpoint() const;
    void load_checkpoint(const nlohmann::json& manifest);

private:
    NdArray check_input(const NdArray& batch) const;

    std::vector<std::size_t> input_shape_;
    std::vector<std::size_t> output_shape_;
    std::vector<std::unique_ptr<Layer>> layers_;
};

/// Mean over all elements of the squared difference.
double mse_loss(const NdArray& pred, const NdArray& actual);

/// d(mse)/d(pred).
NdArray mse_gradient(const NdArray& pred, const NdArray& actual);

/// Forward + MSE + backward for one batch. Leaves the batch gradients in the
/// network's gradient arrays (zeroed first) and returns the batch loss.
double backward(Network& network, const NdArray& inputs, const NdArray& targets);

} // namespace eef
