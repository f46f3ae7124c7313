#include "eef/adam.hpp"

#include "eef/errors.hpp"

#include <cmath>

namespace eef {

AdamState make_adam_state(std::span<const Parameter> params, const AdamConfig& config) {
    AdamState state;
    state.config = config;
    for (const auto& p : params) {
        state.m.emplace_back(p.value->shape());
        state.v.emplace_back(p.value->shape());
    }
    return state;
}

void adam_update(std::span<const Parameter> params, AdamState& state) {
    if (params.size() != state.m.size()) {
        throw StructuralError("adam_update: state tracks " + std::to_string(state.m.size()) +
                              " parameters, got " + std::to_string(params.size()));
    }
    const auto& cfg = state.config;
    ++state.t;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t k = 0; k < params.size(); ++k) {
        NdArray& value = *params[k].value;
        const NdArray& grad = *params[k].grad;
        NdArray& m = state.m[k];
        NdArray& v = state.v[k];
        if (value.shape() != grad.shape() || value.shape() != m.shape()) {
            throw StructuralError("adam_update: shape mismatch for " + params[k].name);
        }
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double g = grad[i];
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            value[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps_stab);
        }
    }
}

} // namespace eef
