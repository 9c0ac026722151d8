#include "dwn/optimizer.hpp"

#include <cmath>

#include "dwn/error.hpp"

namespace dwn {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               uint64_t t, double lr, const AdamParams& hp) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw shape_error("adam_step: tensor size mismatch");

    const double bc1 = 1.0 - std::pow(hp.beta1, double(t));
    const double bc2 = 1.0 - std::pow(hp.beta2, double(t));
    for (size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * g;
        state.v[i] = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * g * g;
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + hp.epsilon);
    }
}

}  // namespace dwn
