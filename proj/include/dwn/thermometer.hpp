#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dwn {

// Real-valued multi-channel window, row-major: value(c, t) = values[c * steps + t].
struct Window {
    uint32_t channels = 0;
    uint32_t steps = 0;
    std::vector<double> values;

    Window() = default;
    Window(uint32_t c, uint32_t t) : channels(c), steps(t), values(size_t(c) * t, 0.0) {}

    double& at(uint32_t c, uint32_t t) { return values[size_t(c) * steps + t]; }
    double at(uint32_t c, uint32_t t) const { return values[size_t(c) * steps + t]; }
};

// Unary bit vector, one byte per bit. Layout is channel-major, then time, then
// threshold index: bit (c, t, k) lives at (c * steps + t) * bits_per_value + k.
// Within each (c, t) group the bits form a unary prefix: a 1 never follows a 0.
struct EncodedSample {
    uint32_t width = 0;
    std::vector<uint8_t> bits;
};

// Maps real sensor values to unary bit vectors using per-channel ordered
// threshold sets. Immutable after construction; encode is pure.
class ThermometerEncoder {
public:
    ThermometerEncoder() = default;
    ThermometerEncoder(uint32_t num_channels, uint32_t bits_per_value,
                       std::vector<double> thresholds);

    // Fits per-channel thresholds at the empirical quantiles k/(B+1),
    // k = 1..B, with linear interpolation between order statistics.
    // Requires every channel to have at least B distinct values.
    static ThermometerEncoder fit_distributive(
        const std::vector<std::vector<double>>& train_values, uint32_t bits_per_value);

    // bit (c, t, k) = 1 iff window(c, t) > threshold(c, k). Ties encode as 0.
    void encode(const Window& window, EncodedSample& out) const;
    EncodedSample encode(const Window& window) const;

    uint32_t num_channels() const { return num_channels_; }
    uint32_t bits_per_value() const { return bits_; }
    uint32_t encoded_width(uint32_t steps) const { return num_channels_ * steps * bits_; }

    double threshold(uint32_t channel, uint32_t k) const {
        return thresholds_[size_t(channel) * bits_ + k];
    }
    std::span<const double> channel_thresholds(uint32_t channel) const {
        return {thresholds_.data() + size_t(channel) * bits_, bits_};
    }
    std::span<const double> raw_thresholds() const { return thresholds_; }

private:
    uint32_t num_channels_ = 0;
    uint32_t bits_ = 0;
    std::vector<double> thresholds_;  // [num_channels][bits], rows non-decreasing
};

}  // namespace dwn
