#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dwn/model.hpp"

namespace dwn {

// Exact expectation semantics of the hard model under independent Bernoulli
// pins: pin value p_j mixes the candidate bits with the mapping softmax, and
// each LUT output is the full multilinear expansion over its 2^arity entries.
// Differentiable everywhere; serves as the oracle for the EFD backward pass.

enum class EntrySquash {
    logistic,  // 1 / (1 + exp(-4 w)), unit slope at 0
    identity,  // raw entry weights
    step,      // [w > 0]; comparison mode, gradient treated as zero
};

struct SoftOptions {
    EntrySquash squash = EntrySquash::logistic;
    // Replace the softmax mixture by the argmax candidate (hardened mapping).
    bool hard_mapping = false;
};

double squash_entry(double w, EntrySquash squash);
double squash_entry_grad(double w, EntrySquash squash);

// Class scores z_c = tau * (sum of soft outputs in group c) / G.
// soft_bits must lie in [0, 1]; arity <= 8 (the 2^n expansion is explicit).
std::vector<double> soft_forward(const DwnModel& model, std::span<const double> soft_bits,
                                 const SoftOptions& opts = {});

struct SoftGradients {
    Gradients params;
    std::vector<double> inputs;  // d(loss)/d(soft input bit)
};

// Exact analytic gradients of soft_forward given d(loss)/d(scores).
SoftGradients soft_gradients(const DwnModel& model, std::span<const double> soft_bits,
                             std::span<const double> upstream, const SoftOptions& opts = {});

}  // namespace dwn
