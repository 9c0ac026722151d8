#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "dwn/thermometer.hpp"

namespace dwn {

// One layer of LUT nodes. Each LUT has `arity` pins; each pin selects its
// input bit from a private candidate pool via a softmax over mapping logits
// (argmax at forward time). Entries are real-valued and binarized on read.
struct LutLayer {
    uint32_t num_luts = 0;
    uint32_t arity = 0;       // 2..8
    uint32_t pool_size = 0;   // candidates per pin
    uint32_t input_width = 0;

    std::vector<double> entry_weights;      // [num_luts][1 << arity]
    std::vector<double> mapping_logits;     // [num_luts][arity][pool_size]
    std::vector<uint32_t> candidate_pools;  // [num_luts][arity][pool_size]

    uint32_t entries_per_lut() const { return 1u << arity; }
    size_t entry_index(uint32_t lut, uint32_t entry) const {
        return size_t(lut) * entries_per_lut() + entry;
    }
    size_t pin_offset(uint32_t lut, uint32_t pin) const {
        return (size_t(lut) * arity + pin) * pool_size;
    }
};

struct ModelConfig {
    std::vector<uint32_t> layer_luts;  // LUTs per layer; last divisible by num_classes
    uint32_t arity = 4;
    uint32_t pool_size = 256;
    double tau = 1.0 / 0.03;
    uint32_t num_classes = 6;
};

// LUT layers plus a grouped-popcount head: class score
// z_c = tau * popcount(group c) / G with G = final_luts / num_classes.
struct DwnModel {
    ThermometerEncoder encoder;
    uint32_t encoder_steps = 0;  // timesteps each window carries
    std::vector<LutLayer> layers;
    uint32_t num_classes = 0;
    double tau = 1.0;

    uint32_t input_width() const { return layers.empty() ? 0 : layers.front().input_width; }
    uint32_t output_luts() const { return layers.empty() ? 0 : layers.back().num_luts; }
    uint32_t group_size() const { return output_luts() / num_classes; }
    void validate() const;
};

// entry_weights ~ U(-1, 1), mapping_logits ~ U(-0.01, 0.01); candidate pools
// drawn without replacement per pin. pool_size must not exceed the layer's
// input width (equal gives a permutation of all indices); pool_size 0 means
// full input width.
DwnModel init_model(const ModelConfig& cfg, const ThermometerEncoder& encoder,
                    uint32_t encoder_steps, std::mt19937_64& rng);

// Frozen pin choices: argmax of mapping logits (ties -> lowest index).
// Valid until the logits change.
struct Routing {
    // Per layer, [num_luts * arity]: candidate index within the pool and the
    // resolved input-bit index.
    std::vector<std::vector<uint32_t>> choice;
    std::vector<std::vector<uint32_t>> source;
};

Routing compute_routing(const DwnModel& model);

// Everything the EFD backward pass needs from the forward pass.
struct LayerTrace {
    std::vector<uint8_t> input_bits;   // this layer's input
    std::vector<uint32_t> addresses;   // per LUT; pin 0 is the least significant bit
    std::vector<uint8_t> outputs;      // per LUT, entry_weights[address] > 0
};

struct ForwardTrace {
    std::vector<LayerTrace> layers;
};

// Hard forward pass: argmax routing, thresholded entries, popcount head.
void forward_hard(const DwnModel& model, const Routing& routing, const EncodedSample& input,
                  ForwardTrace& trace, std::vector<double>& scores);
std::vector<double> forward_hard(const DwnModel& model, const EncodedSample& input,
                                 ForwardTrace* trace = nullptr);

struct Gradients {
    struct LayerGrads {
        std::vector<double> entries;  // same shape as entry_weights
        std::vector<double> logits;   // same shape as mapping_logits
    };
    std::vector<LayerGrads> layers;

    static Gradients zeros_like(const DwnModel& model);
    void add_scaled(const Gradients& other, double factor);
    void clear();
};

// Extended-finite-difference knobs: entries within Hamming distance
// `radius` of the addressed entry receive weight lambda^distance.
struct EfdOptions {
    int radius = 0;
    double lambda = 1.0;
};

// Per-model-state cache shared across a batch: routing plus the softmax of
// every pin's mapping logits.
struct EfdContext {
    Routing routing;
    std::vector<std::vector<double>> softmax;  // per layer, [num_luts * arity * pool_size]

    explicit EfdContext(const DwnModel& model);
};

// Accumulates EFD gradients for one sample into `acc`.
//   head:    d/d(lut output in group c) = upstream[c] * tau / G
//   entries: lambda^ham(u, address) for ham <= radius
//   pins:    entry_weights[address | bit j] - entry_weights[address & ~bit j]
//   logits:  pin gradient chained with s_c * (x_c - sum_c s_c x_c)
// Pin gradients recurse into the producing LUT of the previous layer.
void backward_efd(const DwnModel& model, const EfdContext& ctx, const ForwardTrace& trace,
                  std::span<const double> upstream, const EfdOptions& opts, Gradients& acc);

Gradients backward_efd(const DwnModel& model, const ForwardTrace& trace,
                       std::span<const double> upstream, const EfdOptions& opts = {});

}  // namespace dwn
