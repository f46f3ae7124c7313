#include "eef/layers.hpp"

#include "eef/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace eef {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void require(bool ok, const std::string& what) {
    if (!ok) throw StructuralError(what);
}

/// im2col for a (B × len × channels) input: row (n, p) holds input[n, p .. p+kernel) flattened.
RowMat patches(const NdArray& input, std::size_t kernel) {
    const std::size_t batch = input.dim(0), len = input.dim(1), channels = input.dim(2);
    const std::size_t out_len = len - kernel + 1;
    const std::size_t kc = kernel * channels;
    RowMat P(static_cast<Eigen::Index>(batch * out_len), static_cast<Eigen::Index>(kc));
    for (std::size_t n = 0; n < batch; ++n) {
        for (std::size_t p = 0; p < out_len; ++p) {
            std::copy_n(input.data() + (n * len + p) * channels, kc,
                        P.data() + (n * out_len + p) * kc);
        }
    }
    return P;
}

} // namespace

std::string to_string(Activation kind) {
    switch (kind) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    }
    return "unknown";
}

NdArray apply_activation(Activation kind, const NdArray& z) {
    NdArray out = z;
    for (double& v : out.values()) {
        switch (kind) {
        case Activation::relu: v = v > 0.0 ? v : 0.0; break;
        case Activation::tanh: v = std::tanh(v); break;
        case Activation::sigmoid: v = sigmoid(v); break;
        }
    }
    return out;
}

NdArray activation_derivative(Activation kind, const NdArray& z) {
    NdArray out = z;
    for (double& v : out.values()) {
        switch (kind) {
        case Activation::relu: v = v > 0.0 ? 1.0 : 0.0; break;
        case Activation::tanh: {
            const double t = std::tanh(v);
            v = 1.0 - t * t;
            break;
        }
        case Activation::sigmoid: {
            const double s = sigmoid(v);
            v = s * (1.0 - s);
            break;
        }
        }
    }
    return out;
}

void glorot_uniform(NdArray& weights, std::size_t fan_in, std::size_t fan_out,
                    std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : weights.values()) w = dist(rng);
}

// ---------------------------------------------------------------------------
// Reference single-sample kernels. Plain loops; the layer classes below use
// batched matrix products and are tested against these.
// ---------------------------------------------------------------------------

NdArray dense_forward(const DenseParams& p, const NdArray& y) {
    require(p.W.rank() == 2 && p.b.rank() == 1 && p.b.size() == p.W.dim(0),
            "dense_forward: inconsistent parameter shapes");
    const std::size_t out = p.W.dim(0);
    const std::size_t in = p.W.dim(1);
    const bool batched = y.rank() == 2;
    require((y.rank() == 1 || batched) && y.shape().back() == in,
            "dense_forward: input " + y.shape_string() + " does not match W " +
                p.W.shape_string());
    const std::size_t batch = batched ? y.dim(0) : 1;
    NdArray z = batched ? NdArray({batch, out}) : NdArray({out});
    for (std::size_t n = 0; n < batch; ++n) {
        for (std::size_t o = 0; o < out; ++o) {
            double acc = p.b[o];
            for (std::size_t i = 0; i < in; ++i) acc += p.W[o * in + i] * y[n * in + i];
            z[n * out + o] = acc;
        }
    }
    return z;
}

NdArray conv1d_forward(const Conv1dParams& p, const NdArray& input) {
    require(p.W.rank() == 3 && p.b.size() == p.W.dim(0), "conv1d_forward: bad parameter shapes");
    const std::size_t filters = p.W.dim(0), kernel = p.W.dim(1), channels = p.W.dim(2);
    const bool batched = input.rank() == 3;
    require((input.rank() == 2 || batched) && input.shape().back() == channels,
            "conv1d_forward: input " + input.shape_string() + " does not match W " +
                p.W.shape_string());
    const std::size_t batch = batched ? input.dim(0) : 1;
    const std::size_t len = input.dim(batched ? 1 : 0);
    require(len >= kernel, "conv1d_forward: input length " + std::to_string(len) +
                               " shorter than kernel " + std::to_string(kernel));
    const std::size_t out_len = len - kernel + 1;
    NdArray out = batched ? NdArray({batch, out_len, filters}) : NdArray({out_len, filters});
    for (std::size_t n = 0; n < batch; ++n) {
        const double* x = input.data() + n * len * channels;
        for (std::size_t pos = 0; pos < out_len; ++pos) {
            for (std::size_t f = 0; f < filters; ++f) {
                double acc = p.b[f];
                for (std::size_t k = 0; k < kernel; ++k) {
                    for (std::size_t c = 0; c < channels; ++c) {
                        acc += p.W[(f * kernel + k) * channels + c] * x[(pos + k) * channels + c];
                    }
                }
                out[(n * out_len + pos) * filters + f] = acc;
            }
        }
    }
    return out;
}

NdArray maxpool1d(const NdArray& input, std::size_t pool) {
    require(pool >= 1, "maxpool1d: pool must be >= 1");
    const bool batched = input.rank() == 3;
    require(input.rank() == 2 || batched, "maxpool1d: expected (len x channels) input");
    const std::size_t batch = batched ? input.dim(0) : 1;
    const std::size_t len = input.dim(batched ? 1 : 0);
    const std::size_t channels = input.shape().back();
    const std::size_t out_len = (len + pool - 1) / pool;
    NdArray out = batched ? NdArray({batch, out_len, channels}) : NdArray({out_len, channels});
    for (std::size_t n = 0; n < batch; ++n) {
        for (std::size_t o = 0; o < out_len; ++o) {
            const std::size_t end = std::min(len, (o + 1) * pool);
            for (std::size_t c = 0; c < channels; ++c) {
                double best = input[(n * len + o * pool) * channels + c];
                for (std::size_t l = o * pool + 1; l < end; ++l) {
                    best = std::max(best, input[(n * len + l) * channels + c]);
                }
                out[(n * out_len + o) * channels + c] = best;
            }
        }
    }
    return out;
}

LstmStep lstm_cell(const NdArray& x, const NdArray& h_prev, const NdArray& c_prev,
                   const LstmParams& p) {
    const std::size_t units = p.units();
    const std::size_t in = p.input_size();
    require(p.W.dim(0) == 4 * units && p.U.rank() == 2 && p.U.dim(0) == 4 * units &&
                p.U.dim(1) == units,
            "lstm_cell: inconsistent parameter shapes");
    require(x.size() == in && h_prev.size() == units && c_prev.size() == units,
            "lstm_cell: state/input sizes do not match parameters");
    std::vector<double> z(4 * units);
    for (std::size_t r = 0; r < 4 * units; ++r) {
        double acc = p.b[r];
        for (std::size_t i = 0; i < in; ++i) acc += p.W[r * in + i] * x[i];
        for (std::size_t j = 0; j < units; ++j) acc += p.U[r * units + j] * h_prev[j];
        z[r] = acc;
    }
    LstmStep step{NdArray({units}), NdArray({units})};
    for (std::size_t u = 0; u < units; ++u) {
        const double i = sigmoid(z[u]);
        const double f = sigmoid(z[units + u]);
        const double g = std::tanh(z[2 * units + u]);
        const double o = sigmoid(z[3 * units + u]);
        step.c[u] = f * c_prev[u] + i * g;
        step.h[u] = o * std::tanh(step.c[u]);
    }
    return step;
}

NdArray lstm_layer_forward(const LstmParams& p, const NdArray& sequence, bool return_sequences) {
    require(sequence.rank() == 2, "lstm_layer_forward: expected (steps x features)");
    const std::size_t steps = sequence.dim(0);
    const std::size_t features = sequence.dim(1);
    require(steps >= 1, "lstm_layer_forward: empty sequence");
    const std::size_t units = p.units();
    NdArray h({units}), c({units});
    NdArray all({steps, units});
    for (std::size_t t = 0; t < steps; ++t) {
        NdArray x({features}, std::vector<double>(sequence.data() + t * features,
                                                  sequence.data() + (t + 1) * features));
        auto next = lstm_cell(x, h, c, p);
        h = std::move(next.h);
        c = std::move(next.c);
        std::copy(h.data(), h.data() + units, all.data() + t * units);
    }
    return return_sequences ? all : h;
}

// ---------------------------------------------------------------------------
// Dense
// ---------------------------------------------------------------------------

DenseLayer::DenseLayer(std::size_t in, std::size_t out)
    : params_{NdArray({out, in}), NdArray({out})}, grads_{NdArray({out, in}), NdArray({out})} {
    require(in >= 1 && out >= 1, "dense: sizes must be >= 1");
}

NdArray DenseLayer::infer(const NdArray& input) const {
    const std::size_t out = params_.W.dim(0), in = params_.W.dim(1);
    require(input.rank() == 2 && input.dim(1) == in,
            "dense: input " + input.shape_string() + " does not match W " +
                params_.W.shape_string());
    const std::size_t batch = input.dim(0);
    NdArray z({batch, out});
    ConstMatMap X(input.data(), static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(in));
    ConstMatMap W(params_.W.data(), static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    ConstVecMap b(params_.b.data(), static_cast<Eigen::Index>(out));
    MatMap Z(z.data(), static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(out));
    Z.noalias() = X * W.transpose();
    Z.rowwise() += b.transpose();
    return z;
}

NdArray DenseLayer::forward(const NdArray& input) {
    input_ = input;
    return infer(input);
}

NdArray DenseLayer::backward(const NdArray& grad_output) {
    const std::size_t out = params_.W.dim(0), in = params_.W.dim(1);
    const std::size_t batch = input_.dim(0);
    require(grad_output.rank() == 2 && grad_output.dim(0) == batch && grad_output.dim(1) == out,
            "dense: gradient shape mismatch");
    const auto B = static_cast<Eigen::Index>(batch);
    const auto O = static_cast<Eigen::Index>(out);
    const auto I = static_cast<Eigen::Index>(in);
    ConstMatMap G(grad_output.data(), B, O);
    ConstMatMap X(input_.data(), B, I);
    ConstMatMap W(params_.W.data(), O, I);
    MatMap dW(grads_.W.data(), O, I);
    VecMap db(grads_.b.data(), O);
    dW.noalias() += G.transpose() * X;
    db += G.colwise().sum().transpose();
    NdArray grad_input({batch, in});
    MatMap dX(grad_input.data(), B, I);
    dX.noalias() = G * W;
    return grad_input;
}

std::vector<Parameter> DenseLayer::parameters() {
    return {{"W", &params_.W, &grads_.W}, {"b", &params_.b, &grads_.b}};
}

void DenseLayer::initialize(std::mt19937_64& rng) {
    glorot_uniform(params_.W, params_.W.dim(1), params_.W.dim(0), rng);
    params_.b.fill(0.0);
}

std::vector<std::size_t> DenseLayer::output_shape(const std::vector<std::size_t>& input) const {
    require(input.size() == 1 && input[0] == params_.W.dim(1), "dense: incompatible input shape");
    return {params_.W.dim(0)};
}

// ---------------------------------------------------------------------------
// Activation
// ---------------------------------------------------------------------------

NdArray ActivationLayer::forward(const NdArray& input) {
    input_ = input;
    return apply_activation(activation_, input);
}

NdArray ActivationLayer::infer(const NdArray& input) const {
    return apply_activation(activation_, input);
}

NdArray ActivationLayer::backward(const NdArray& grad_output) {
    require(grad_output.shape() == input_.shape(), "activation: gradient shape mismatch");
    NdArray grad = activation_derivative(activation_, input_);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= grad_output[i];
    return grad;
}

// ---------------------------------------------------------------------------
// Conv1d
// ---------------------------------------------------------------------------

Conv1dLayer::Conv1dLayer(std::size_t in_channels, std::size_t filters, std::size_t kernel)
    : params_{NdArray({filters, kernel, in_channels}), NdArray({filters})},
      grads_{NdArray({filters, kernel, in_channels}), NdArray({filters})} {
    require(in_channels >= 1 && filters >= 1 && kernel >= 1, "conv1d: sizes must be >= 1");
}

NdArray Conv1dLayer::infer(const NdArray& input) const {
    const std::size_t filters = params_.W.dim(0), kernel = params_.W.dim(1),
                      channels = params_.W.dim(2);
    require(input.rank() == 3 && input.dim(2) == channels,
            "conv1d: input " + input.shape_string() + " does not match W " +
                params_.W.shape_string());
    const std::size_t batch = input.dim(0), len = input.dim(1);
    require(len >= kernel, "conv1d: input length " + std::to_string(len) +
                               " shorter than kernel " + std::to_string(kernel));
    const std::size_t out_len = len - kernel + 1;
    const auto KC = static_cast<Eigen::Index>(kernel * channels);
    const auto F = static_cast<Eigen::Index>(filters);
    const auto rows = static_cast<Eigen::Index>(batch * out_len);
    const RowMat P = patches(input, kernel);
    ConstMatMap W(params_.W.data(), F, KC);
    ConstVecMap b(params_.b.data(), F);
    NdArray out({batch, out_len, filters});
    MatMap Y(out.data(), rows, F);
    Y.noalias() = P * W.transpose();
    Y.rowwise() += b.transpose();
    return out;
}

NdArray Conv1dLayer::forward(const NdArray& input) {
    input_ = input;
    return infer(input);
}

NdArray Conv1dLayer::backward(const NdArray& grad_output) {
    const std::size_t filters = params_.W.dim(0), kernel = params_.W.dim(1),
                      channels = params_.W.dim(2);
    const std::size_t batch = input_.dim(0), len = input_.dim(1);
    const std::size_t out_len = len - kernel + 1;
    require(grad_output.rank() == 3 && grad_output.dim(0) == batch &&
                grad_output.dim(1) == out_len && grad_output.dim(2) == filters,
            "conv1d: gradient shape mismatch");
    const auto KC = static_cast<Eigen::Index>(kernel * channels);
    const auto F = static_cast<Eigen::Index>(filters);
    const auto rows = static_cast<Eigen::Index>(batch * out_len);
    const RowMat P = patches(input_, kernel);
    ConstMatMap G(grad_output.data(), rows, F);
    ConstMatMap W(params_.W.data(), F, KC);
    MatMap dW(grads_.W.data(), F, KC);
    VecMap db(grads_.b.data(), F);
    dW.noalias() += G.transpose() * P;
    db += G.colwise().sum().transpose();
    const RowMat dP = G * W;
    // Patch rows overlap in the input; scatter-add them back.
    NdArray grad_input({batch, len, channels});
    const std::size_t kc = kernel * channels;
    for (std::size_t n = 0; n < batch; ++n) {
        double* dx = grad_input.data() + n * len * channels;
        for (std::size_t p = 0; p < out_len; ++p) {
            const double* src = dP.data() + (n * out_len + p) * kc;
            double* dst = dx + p * channels;
            for (std::size_t j = 0; j < kc; ++j) dst[j] += src[j];
        }
    }
    return grad_input;
}

std::vector<Parameter> Conv1dLayer::parameters() {
    return {{"W", &params_.W, &grads_.W}, {"b", &params_.b, &grads_.b}};
}

void Conv1dLayer::initialize(std::mt19937_64& rng) {
    const std::size_t filters = params_.W.dim(0), kernel = params_.W.dim(1),
                      channels = params_.W.dim(2);
    glorot_uniform(params_.W, kernel * channels, kernel * filters, rng);
    params_.b.fill(0.0);
}

std::vector<std::size_t> Conv1dLayer::output_shape(const std::vector<std::size_t>& input) const {
    require(input.size() == 2 && input[1] == params_.W.dim(2), "conv1d: incompatible input shape");
    require(input[0] >= params_.W.dim(1), "conv1d: kernel " + std::to_string(params_.W.dim(1)) +
                                              " longer than input " + std::to_string(input[0]));
    return {input[0] - params_.W.dim(1) + 1, params_.W.dim(0)};
}

// ---------------------------------------------------------------------------
// MaxPool1d
// ---------------------------------------------------------------------------

MaxPool1dLayer::MaxPool1dLayer(std::size_t pool) : pool_(pool) {
    require(pool >= 1, "maxpool1d: pool must be >= 1");
}

NdArray MaxPool1dLayer::infer(const NdArray& input) const {
    require(input.rank() == 3, "maxpool1d: expected (B x len x channels)");
    return maxpool1d(input, pool_);
}

NdArray MaxPool1dLayer::forward(const NdArray& input) {
    require(input.rank() == 3, "maxpool1d: expected (B x len x channels)");
    input_shape_ = input.shape();
    const std::size_t batch = input.dim(0), len = input.dim(1), channels = input.dim(2);
    const std::size_t out_len = (len + pool_ - 1) / pool_;
    NdArray out({batch, out_len, channels});
    argmax_.assign(out.size(), 0);
    for (std::size_t n = 0; n < batch; ++n) {
        for (std::size_t o = 0; o < out_len; ++o) {
            const std::size_t end = std::min(len, (o + 1) * pool_);
            for (std::size_t c = 0; c < channels; ++c) {
                std::size_t best = (n * len + o * pool_) * channels + c;
                for (std::size_t l = o * pool_ + 1; l < end; ++l) {
                    const std::size_t idx = (n * len + l) * channels + c;
                    if (input[idx] > input[best]) best = idx;
                }
                const std::size_t dst = (n * out_len + o) * channels + c;
                out[dst] = input[best];
                argmax_[dst] = best;
            }
        }
    }
    return out;
}

NdArray MaxPool1dLayer::backward(const NdArray& grad_output) {
    require(grad_output.size() == argmax_.size(), "maxpool1d: gradient shape mismatch");
    NdArray grad_input(input_shape_);
    for (std::size_t i = 0; i < argmax_.size(); ++i) grad_input[argmax_[i]] += grad_output[i];
    return grad_input;
}

std::vector<std::size_t> MaxPool1dLayer::output_shape(const std::vector<std::size_t>& input) const {
    require(input.size() == 2, "maxpool1d: incompatible input shape");
    return {(input[0] + pool_ - 1) / pool_, input[1]};
}

// ---------------------------------------------------------------------------
// Flatten
// ---------------------------------------------------------------------------

NdArray FlattenLayer::infer(const NdArray& input) const {
    require(input.rank() >= 1, "flatten: empty shape");
    const std::size_t batch = input.dim(0);
    return input.reshaped({batch, batch ? input.size() / batch : 0});
}

NdArray FlattenLayer::forward(const NdArray& input) {
    input_shape_ = input.shape();
    return infer(input);
}

NdArray FlattenLayer::backward(const NdArray& grad_output) {
    return grad_output.reshaped(input_shape_);
}

std::vector<std::size_t> FlattenLayer::output_shape(const std::vector<std::size_t>& input) const {
    return {shape_product(input)};
}

// ---------------------------------------------------------------------------
// LSTM
// ---------------------------------------------------------------------------

LstmLayer::LstmLayer(std::size_t in, std::size_t units, bool return_sequences)
    : params_{NdArray({4 * units, in}), NdArray({4 * units, units}), NdArray({4 * units})},
      grads_{NdArray({4 * units, in}), NdArray({4 * units, units}), NdArray({4 * units})},
      return_sequences_(return_sequences) {
    require(in >= 1 && units >= 1, "lstm: sizes must be >= 1");
}

NdArray LstmLayer::run(const NdArray& input, Cache* cache) const {
    const std::size_t units = params_.units(), in = params_.input_size();
    require(input.rank() == 3 && input.dim(2) == in,
            "lstm: input " + input.shape_string() + " does not match W " +
                params_.W.shape_string());
    const std::size_t batch = input.dim(0), steps = input.dim(1);
    require(steps >= 1, "lstm: empty sequence");
    const auto B = static_cast<Eigen::Index>(batch);
    const auto I = static_cast<Eigen::Index>(in);
    const auto U4 = static_cast<Eigen::Index>(4 * units);
    const auto Un = static_cast<Eigen::Index>(units);
    ConstMatMap W(params_.W.data(), U4, I);
    ConstMatMap Ur(params_.U.data(), U4, Un);
    ConstVecMap b(params_.b.data(), U4);

    const std::size_t bu = batch * units;
    std::vector<double> h(bu, 0.0), c(bu, 0.0), x(batch * in);
    RowMat Z(B, U4);
    if (cache) {
        cache->batch = batch;
        cache->steps = steps;
        cache->x.assign(steps * batch * in, 0.0);
        cache->gates.assign(steps * batch * 4 * units, 0.0);
        cache->c.assign((steps + 1) * bu, 0.0);
        cache->h.assign((steps + 1) * bu, 0.0);
        cache->tanh_c.assign(steps * bu, 0.0);
    }
    NdArray out = return_sequences_ ? NdArray({batch, steps, units}) : NdArray({batch, units});

    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t n = 0; n < batch; ++n) {
            std::copy_n(input.data() + (n * steps + t) * in, in, x.data() + n * in);
        }
        ConstMatMap Xt(x.data(), B, I);
        ConstMatMap Hp(h.data(), B, Un);
        Z.noalias() = Xt * W.transpose();
        Z.noalias() += Hp * Ur.transpose();
        Z.rowwise() += b.transpose();
        for (std::size_t n = 0; n < batch; ++n) {
            double* z = Z.data() + n * 4 * units;
            for (std::size_t u = 0; u < units; ++u) {
                z[u] = sigmoid(z[u]);
                z[units + u] = sigmoid(z[units + u]);
                z[2 * units + u] = std::tanh(z[2 * units + u]);
                z[3 * units + u] = sigmoid(z[3 * units + u]);
                double& cell = c[n * units + u];
                cell = z[units + u] * cell + z[u] * z[2 * units + u];
                const double tc = std::tanh(cell);
                h[n * units + u] = z[3 * units + u] * tc;
                if (cache) cache->tanh_c[t * bu + n * units + u] = tc;
            }
        }
        if (cache) {
            std::copy(x.begin(), x.end(), cache->x.begin() + static_cast<std::ptrdiff_t>(t * batch * in));
            std::copy_n(Z.data(), batch * 4 * units, cache->gates.data() + t * batch * 4 * units);
            std::copy(c.begin(), c.end(), cache->c.begin() + static_cast<std::ptrdiff_t>((t + 1) * bu));
            std::copy(h.begin(), h.end(), cache->h.begin() + static_cast<std::ptrdiff_t>((t + 1) * bu));
        }
        if (return_sequences_) {
            for (std::size_t n = 0; n < batch; ++n) {
                std::copy_n(h.data() + n * units, units, out.data() + (n * steps + t) * units);
            }
        }
    }
    if (!return_sequences_) std::copy(h.begin(), h.end(), out.data());
    return out;
}

NdArray LstmLayer::infer(const NdArray& input) const { return run(input, nullptr); }

NdArray LstmLayer::forward(const NdArray& input) { return run(input, &cache_); }

NdArray LstmLayer::backward(const NdArray& grad_output) {
    const std::size_t units = params_.units(), in = params_.input_size();
    const std::size_t batch = cache_.batch, steps = cache_.steps;
    if (return_sequences_) {
        require(grad_output.rank() == 3 && grad_output.dim(0) == batch &&
                    grad_output.dim(1) == steps && grad_output.dim(2) == units,
                "lstm: gradient shape mismatch");
    } else {
        require(grad_output.rank() == 2 && grad_output.dim(0) == batch &&
                    grad_output.dim(1) == units,
                "lstm: gradient shape mismatch");
    }
    const auto B = static_cast<Eigen::Index>(batch);
    const auto I = static_cast<Eigen::Index>(in);
    const auto U4 = static_cast<Eigen::Index>(4 * units);
    const auto Un = static_cast<Eigen::Index>(units);
    ConstMatMap W(params_.W.data(), U4, I);
    ConstMatMap Ur(params_.U.data(), U4, Un);
    MatMap dW(grads_.W.data(), U4, I);
    MatMap dU(grads_.U.data(), U4, Un);
    VecMap db(grads_.b.data(), U4);

    const std::size_t bu = batch * units;
    RowMat dh_next = RowMat::Zero(B, Un);
    std::vector<double> dc_next(bu, 0.0);
    RowMat dZ(B, U4);
    RowMat dX(B, I);
    NdArray grad_input({batch, steps, in});

    for (std::size_t step = steps; step-- > 0;) {
        const double* gates = cache_.gates.data() + step * batch * 4 * units;
        const double* c_prev = cache_.c.data() + step * bu;
        const double* tanh_c = cache_.tanh_c.data() + step * bu;
        for (std::size_t n = 0; n < batch; ++n) {
            const double* g = gates + n * 4 * units;
            double* dz = dZ.data() + n * 4 * units;
            for (std::size_t u = 0; u < units; ++u) {
                const std::size_t k = n * units + u;
                double dh = dh_next(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(u));
                if (return_sequences_) {
                    dh += grad_output[(n * steps + step) * units + u];
                } else if (step + 1 == steps) {
                    dh += grad_output[n * units + u];
                }
                const double gi = g[u], gf = g[units + u], gg = g[2 * units + u],
                             go = g[3 * units + u];
                const double tc = tanh_c[k];
                const double d_o = dh * tc;
                const double dc = dh * go * (1.0 - tc * tc) + dc_next[k];
                dc_next[k] = dc * gf;
                dz[u] = dc * gg * gi * (1.0 - gi);
                dz[units + u] = dc * c_prev[k] * gf * (1.0 - gf);
                dz[2 * units + u] = dc * gi * (1.0 - gg * gg);
                dz[3 * units + u] = d_o * go * (1.0 - go);
            }
        }
        ConstMatMap Xt(cache_.x.data() + step * batch * in, B, I);
        ConstMatMap Hp(cache_.h.data() + step * bu, B, Un);
        dW.noalias() += dZ.transpose() * Xt;
        dU.noalias() += dZ.transpose() * Hp;
        db += dZ.colwise().sum().transpose();
        dX.noalias() = dZ * W;
        dh_next.noalias() = dZ * Ur;
        for (std::size_t n = 0; n < batch; ++n) {
            std::copy_n(dX.data() + n * in, in, grad_input.data() + (n * steps + step) * in);
        }
    }
    return grad_input;
}

std::vector<Parameter> LstmLayer::parameters() {
    return {{"W", &params_.W, &grads_.W}, {"U", &params_.U, &grads_.U}, {"b", &params_.b, &grads_.b}};
}

void LstmLayer::initialize(std::mt19937_64& rng) {
    const std::size_t units = params_.units(), in = params_.input_size();
    glorot_uniform(params_.W, in, 4 * units, rng);
    glorot_uniform(params_.U, units, 4 * units, rng);
    params_.b.fill(0.0);
    for (std::size_t u = 0; u < units; ++u) params_.b[units + u] = 1.0;
}

std::vector<std::size_t> LstmLayer::output_shape(const std::vector<std::size_t>& input) const {
    require(input.size() == 2 && input[1] == params_.input_size() && input[0] >= 1,
            "lstm: incompatible input shape");
    if (return_sequences_) return {input[0], params_.units()};
    return {params_.units()};
}

} // namespace eef
