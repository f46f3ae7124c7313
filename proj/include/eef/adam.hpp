#pragma once

#include "eef/layers.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace eef {

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_stab = 1e-8;
};

/// First/second moment estimates, one array per parameter, plus the step count.
struct AdamState {
    AdamConfig config;
    std::vector<NdArray> m;
    std::vector<NdArray> v;
    std::int64_t t = 0;
};

AdamState make_adam_state(std::span<const Parameter> params, const AdamConfig& config = {});

/// One Adam step using the gradients stored alongside each parameter:
///   m ← β₁m + (1−β₁)g,  v ← β₂v + (1−β₂)g²,
///   p ← p − lr · m̂ / (√v̂ + eps) with m̂ = m/(1−β₁ᵗ), v̂ = v/(1−β₂ᵗ).
void adam_update(std::span<const Parameter> params, AdamState& state);

} // namespace eef
