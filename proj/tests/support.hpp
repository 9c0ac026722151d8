#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dwn/har_dataset.hpp"
#include "dwn/model.hpp"
#include "dwn/thermometer.hpp"

namespace dwn::testing {

// Encoder with evenly spaced thresholds in (lo, hi) per channel.
inline ThermometerEncoder make_toy_encoder(uint32_t channels, uint32_t bits, double lo = 0.0,
                                           double hi = 1.0) {
    std::vector<double> thresholds;
    thresholds.reserve(size_t(channels) * bits);
    for (uint32_t c = 0; c < channels; ++c)
        for (uint32_t k = 0; k < bits; ++k)
            thresholds.push_back(lo + (hi - lo) * double(k + 1) / double(bits + 1));
    return ThermometerEncoder(channels, bits, std::move(thresholds));
}

// Model with fully pinned routing: pool_size 1, every pin wired to the given
// source index. `layer_sources` is per layer [lut][pin] -> input bit index;
// `layer_weights` per layer [lut][entry].
inline DwnModel make_manual_model(const ThermometerEncoder& encoder, uint32_t steps,
                                  uint32_t num_classes, double tau,
                                  const std::vector<std::vector<std::vector<uint32_t>>>& layer_sources,
                                  const std::vector<std::vector<std::vector<double>>>& layer_weights) {
    DwnModel m;
    m.encoder = encoder;
    m.encoder_steps = steps;
    m.num_classes = num_classes;
    m.tau = tau;
    uint32_t width = encoder.encoded_width(steps);
    for (size_t li = 0; li < layer_sources.size(); ++li) {
        LutLayer layer;
        layer.num_luts = uint32_t(layer_sources[li].size());
        layer.arity = uint32_t(layer_sources[li][0].size());
        layer.pool_size = 1;
        layer.input_width = width;
        for (const auto& lut_sources : layer_sources[li])
            for (uint32_t src : lut_sources) {
                layer.candidate_pools.push_back(src);
                layer.mapping_logits.push_back(0.0);
            }
        for (const auto& lut_weights : layer_weights[li])
            layer.entry_weights.insert(layer.entry_weights.end(), lut_weights.begin(),
                                       lut_weights.end());
        width = layer.num_luts;
        m.layers.push_back(std::move(layer));
    }
    m.validate();
    return m;
}

// Random small model for oracle checks.
inline DwnModel make_random_model(std::mt19937_64& rng, uint32_t input_bits, uint32_t num_luts,
                                  uint32_t arity, uint32_t pool_size, uint32_t num_classes,
                                  double tau = 1.0) {
    ThermometerEncoder enc = make_toy_encoder(1, input_bits);
    ModelConfig mc;
    mc.layer_luts = {num_luts};
    mc.arity = arity;
    mc.pool_size = pool_size;
    mc.tau = tau;
    mc.num_classes = num_classes;
    return init_model(mc, enc, 1, rng);
}

inline EncodedSample bits_sample(const std::vector<uint8_t>& bits) {
    EncodedSample s;
    s.width = uint32_t(bits.size());
    s.bits = bits;
    return s;
}

inline std::vector<uint8_t> random_bits(std::mt19937_64& rng, size_t n) {
    std::vector<uint8_t> bits(n);
    std::bernoulli_distribution coin(0.5);
    for (uint8_t& b : bits) b = coin(rng) ? 1 : 0;
    return bits;
}

// Labelled windows whose per-class mean and oscillation differ strongly;
// easily separable after thermometer encoding.
inline SensorDataset make_synthetic_dataset(size_t n, uint32_t num_classes, uint64_t seed,
                                            uint32_t channels = 9, uint32_t steps = 128) {
    SensorDataset ds;
    ds.channels = channels;
    ds.steps = steps;
    ds.num_classes = num_classes;
    ds.min_label = 0;
    ds.split_tag = "synthetic";
    ds.values.resize(n * size_t(channels) * steps);
    ds.labels.resize(n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.1);
    for (size_t i = 0; i < n; ++i) {
        const uint32_t k = uint32_t(i % num_classes);
        ds.labels[i] = int16_t(k);
        float* w = ds.values.data() + i * size_t(channels) * steps;
        const double base = -0.8 + 1.6 * double(k) / double(std::max(1u, num_classes - 1));
        const double freq = 1.0 + double(k);
        for (uint32_t c = 0; c < channels; ++c)
            for (uint32_t t = 0; t < steps; ++t)
                w[size_t(c) * steps + t] =
                    float(base + 0.4 * std::sin(2.0 * 3.14159265358979 * freq * t / steps + c) +
                          noise(rng));
    }
    return ds;
}

}  // namespace dwn::testing
