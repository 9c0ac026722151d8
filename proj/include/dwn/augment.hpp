#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "dwn/thermometer.hpp"

namespace dwn {

// Stochastic 1D augmentations applied to raw windows before encoding. Each
// transform is gated independently with probability `probability` inside
// apply_all, in this order: shift, scale, jitter, mask, flip, rotate, lowpass.
struct AugmentConfig {
    double probability = 0.3;
    int max_shift = 10;
    double scale_min = 0.9;
    double scale_max = 1.1;
    double jitter_sigma = 0.05;
    int max_mask_len = 10;
    double max_rotation_deg = 10.0;
    double lowpass_cutoff_hz = 20.0;
    double sample_rate_hz = 50.0;
    uint64_t seed = 0;

    void validate() const;  // 0 <= p <= 1, cutoff strictly below Nyquist
};

// Moves samples by `shift` steps (positive = later); vacated positions are
// zero-filled, length preserved.
void time_shift(Window& w, int shift);

void scale(Window& w, double factor);

// Adds i.i.d. zero-mean Gaussian noise to every value.
void jitter(Window& w, double sigma, std::mt19937_64& rng);

// Zeroes columns [start, start + len) on all channels.
void time_mask(Window& w, uint32_t start, uint32_t len);

// Negates channels whose mask bit is set (bit c = channel c).
void axis_flip(Window& w, uint32_t channel_mask);

// Rotates channels 0..2, treated as a 3-vector per timestep, about `axis`
// by `angle_deg`; remaining channels untouched.
void rotate3(Window& w, const std::array<double, 3>& axis, double angle_deg);

// Order-4 Butterworth low-pass, run forward-backward for zero phase.
void lowpass(Window& w, double cutoff_hz, double sample_rate_hz);

// Applies each transform with probability p, parameters drawn from rng.
void apply_all(Window& w, const AugmentConfig& cfg, std::mt19937_64& rng);

// Per-sample random stream: derived from (cfg.seed, epoch, sample index) so
// samples are independent and the whole schedule is reproducible.
std::mt19937_64 sample_stream(const AugmentConfig& cfg, uint64_t epoch, uint64_t sample_index);

// One second-order section, direct form II transposed, normalized (a0 = 1).
struct Biquad {
    double b0, b1, b2, a1, a2;
};

// Butterworth low-pass as cascaded biquads (even order only).
std::vector<Biquad> butterworth_lowpass_sections(int order, double cutoff_hz,
                                                 double sample_rate_hz);

// |H(e^{j 2 pi f / fs})| of a biquad cascade; test oracle for the filter.
double cascade_gain_at(const std::vector<Biquad>& sections, double freq_hz, double sample_rate_hz);

}  // namespace dwn
