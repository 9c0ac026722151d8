#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dwn/har_dataset.hpp"
#include "dwn/metrics.hpp"
#include "dwn/model.hpp"
#include "dwn/thermometer.hpp"

namespace dwn {

// Static routing plus bit-packed LUT contents; everything inference needs.
struct FrozenLayer {
    uint32_t num_luts = 0;
    uint32_t arity = 0;
    uint32_t input_width = 0;
    std::vector<uint32_t> routing;   // [num_luts][arity] input-bit indices
    std::vector<uint64_t> lut_bits;  // num_luts * 2^arity bits, packed

    uint32_t entries_per_lut() const { return 1u << arity; }
    bool lut_bit(uint32_t lut, uint32_t entry) const {
        const size_t b = size_t(lut) * entries_per_lut() + entry;
        return (lut_bits[b >> 6] >> (b & 63)) & 1u;
    }
};

struct FrozenModel {
    ThermometerEncoder encoder;
    uint32_t encoder_steps = 0;
    uint32_t num_classes = 0;
    double tau = 1.0;
    std::vector<FrozenLayer> layers;

    uint32_t input_width() const { return layers.empty() ? 0 : layers.front().input_width; }
    uint32_t output_luts() const { return layers.empty() ? 0 : layers.back().num_luts; }
    uint32_t group_size() const { return output_luts() / num_classes; }
};

// Mapping argmax per pin (ties -> lowest index); entry bit = [weight > 0].
FrozenModel freeze(const DwnModel& model);

struct Prediction {
    uint32_t label = 0;              // class index, ties -> lowest
    std::vector<double> scores;      // tau * popcount / G per class
};

struct PredictScratch {
    std::vector<uint64_t> cur, next;
    std::vector<uint32_t> counts;
};

// encode -> gather routed bits -> LUT lookup -> popcount -> argmax.
// Integer-only after encoding.
Prediction predict(const FrozenModel& m, const Window& window, PredictScratch* scratch = nullptr);

// Same, starting from an already-encoded bit vector (one byte per bit).
Prediction predict_bits(const FrozenModel& m, std::span<const uint8_t> bits,
                        PredictScratch* scratch = nullptr);

// LUT content bits / 8, rounded up; routing and encoder are excluded.
uint64_t model_size_bytes(const FrozenModel& m);

// Binary model file, little-endian throughout:
//   "DWNM", u32 version, u32 num_layers, per layer {u32 num_luts, u32 arity},
//   u32 num_classes, f64 tau, u32 enc_channels, u32 enc_steps, u32 enc_bits,
//   thresholds (f64, channel-major), routing (u32, layer/LUT/pin order),
//   LUT bits (packed little-endian within bytes, layer/LUT/entry order).
void save_model(const FrozenModel& m, const std::string& path);
FrozenModel load_model(const std::string& path);

struct BenchReport {
    uint32_t repetitions = 0;
    uint64_t total_inferences = 0;
    double samples_per_second = 0.0;
    double mean_us = 0.0;  // per-sample, over timed passes
    double min_us = 0.0;
    double max_us = 0.0;
};

// Wall-clock over `repetitions` full passes, one untimed warmup pass first.
BenchReport bench(const FrozenModel& m, const SensorDataset& ds, uint32_t repetitions);

Metrics evaluate_frozen(const FrozenModel& m, const SensorDataset& ds);

}  // namespace dwn
