#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dwn {

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// First/second moment estimates for one parameter tensor.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;

    explicit AdamState(size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update; `t` is the 1-based step count.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               uint64_t t, double lr, const AdamParams& hp = {});

}  // namespace dwn
