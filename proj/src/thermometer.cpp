#include "dwn/thermometer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dwn/error.hpp"

namespace dwn {

namespace {

// Linear-interpolation quantile over a sorted sample: rank h = (n - 1) * q.
double linear_quantile(const std::vector<double>& sorted, double q) {
    const size_t n = sorted.size();
    const double h = double(n - 1) * q;
    const size_t lo = size_t(h);
    if (lo + 1 >= n) return sorted.back();
    const double frac = h - double(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

ThermometerEncoder::ThermometerEncoder(uint32_t num_channels, uint32_t bits_per_value,
                                       std::vector<double> thresholds)
    : num_channels_(num_channels), bits_(bits_per_value), thresholds_(std::move(thresholds)) {
    if (num_channels_ == 0 || bits_ == 0)
        throw shape_error("thermometer encoder needs at least one channel and one bit");
    if (thresholds_.size() != size_t(num_channels_) * bits_)
        throw shape_error("thermometer thresholds size mismatch: expected " +
                          std::to_string(size_t(num_channels_) * bits_) + ", got " +
                          std::to_string(thresholds_.size()));
    for (uint32_t c = 0; c < num_channels_; ++c)
        for (uint32_t k = 1; k < bits_; ++k)
            if (threshold(c, k) < threshold(c, k - 1))
                throw data_error("thresholds of channel " + std::to_string(c) +
                                 " are not non-decreasing");
}

ThermometerEncoder ThermometerEncoder::fit_distributive(
    const std::vector<std::vector<double>>& train_values, uint32_t bits_per_value) {
    if (train_values.empty()) throw shape_error("no channels to fit");
    if (bits_per_value == 0) throw shape_error("bits_per_value must be positive");

    const uint32_t channels = uint32_t(train_values.size());
    const uint32_t B = bits_per_value;
    std::vector<double> thresholds(size_t(channels) * B);

    std::vector<double> sorted;
    for (uint32_t c = 0; c < channels; ++c) {
        sorted = train_values[c];
        std::sort(sorted.begin(), sorted.end());
        size_t distinct = sorted.empty() ? 0 : 1;
        for (size_t i = 1; i < sorted.size(); ++i)
            if (sorted[i] != sorted[i - 1]) ++distinct;
        if (distinct < B)
            throw data_error("degenerate channel " + std::to_string(c) + ": only " +
                             std::to_string(distinct) + " distinct values, need >= " +
                             std::to_string(B));
        for (uint32_t k = 0; k < B; ++k) {
            const double q = double(k + 1) / double(B + 1);
            thresholds[size_t(c) * B + k] = linear_quantile(sorted, q);
        }
    }
    return ThermometerEncoder(channels, B, std::move(thresholds));
}

void ThermometerEncoder::encode(const Window& window, EncodedSample& out) const {
    if (window.channels != num_channels_)
        throw shape_error("encode: window has " + std::to_string(window.channels) +
                          " channels, encoder expects " + std::to_string(num_channels_));
    const uint32_t T = window.steps;
    out.width = encoded_width(T);
    out.bits.assign(out.width, 0);

    for (uint32_t c = 0; c < num_channels_; ++c) {
        const double* thr = thresholds_.data() + size_t(c) * bits_;
        for (uint32_t t = 0; t < T; ++t) {
            const double v = window.at(c, t);
            // ones = |{k : thr[k] < v}|; rows are non-decreasing so the
            // crossed thresholds are exactly a prefix.
            const uint32_t ones =
                uint32_t(std::lower_bound(thr, thr + bits_, v) - thr);
            uint8_t* group = out.bits.data() + (size_t(c) * T + t) * bits_;
            for (uint32_t k = 0; k < ones; ++k) group[k] = 1;
        }
    }
}

EncodedSample ThermometerEncoder::encode(const Window& window) const {
    EncodedSample out;
    encode(window, out);
    return out;
}

}  // namespace dwn
