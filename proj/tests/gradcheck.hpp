#pragma once

#include "eef/errors.hpp"
#include "eef/layers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace eef::testing {

inline NdArray random_array(std::vector<std::size_t> shape, std::mt19937_64& rng, double scale = 1.0) {
    NdArray a(std::move(shape));
    std::uniform_real_distribution<double> u(-scale, scale);
    for (auto& v : a.values()) v = u(rng);
    return a;
}

// ||a − n|| / (||a|| + ||n||); the absolute difference when both vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& n) {
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - n[i]) * (a[i] - n[i]);
        na += a[i] * a[i];
        nn += n[i] * n[i];
    }
    const double denom = std::sqrt(na) + std::sqrt(nn);
    return denom < 1e-12 ? std::sqrt(diff) : std::sqrt(diff) / denom;
}

// Central finite differences (step 1e-5) of L = Σ r ⊙ layer(x) against backward().
// Returns the worst relative error over the input and every parameter tensor.
inline double gradient_check(Layer& layer, NdArray x, std::mt19937_64& rng) {
    const double h = 1e-5;
    const NdArray out = layer.forward(x);
    const NdArray r = random_array(out.shape(), rng);
    for (auto& p : layer.parameters()) p.grad->fill(0.0);
    const NdArray gx = layer.backward(r);
    if (gx.shape() != x.shape()) throw StructuralError("gradient_check: input gradient shape");

    auto loss = [&](const NdArray& input) {
        const NdArray y = layer.infer(input);
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
        return s;
    };
    auto numeric_grad = [&](NdArray& target) {
        std::vector<double> g;
        for (std::size_t i = 0; i < target.size(); ++i) {
            const double keep = target[i];
            target[i] = keep + h;
            const double up = loss(x);
            target[i] = keep - h;
            const double down = loss(x);
            target[i] = keep;
            g.push_back((up - down) / (2 * h));
        }
        return g;
    };

    double worst = relative_error({gx.values().begin(), gx.values().end()}, numeric_grad(x));
    for (auto& p : layer.parameters()) {
        worst = std::max(worst, relative_error({p.grad->values().begin(), p.grad->values().end()},
                                               numeric_grad(*p.value)));
    }
    return worst;
}

} // namespace eef::testing
