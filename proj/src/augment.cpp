#include "dwn/augment.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <string>

#include "dwn/error.hpp"
#include "dwn/rng.hpp"

namespace dwn {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr int kFilterOrder = 4;
// Odd-reflection padding length for the zero-phase pass.
constexpr uint32_t kPadLen = 3 * (kFilterOrder + 1);
}  // namespace

void AugmentConfig::validate() const {
    if (probability < 0.0 || probability > 1.0)
        throw config_error("augment probability must be in [0, 1]");
    if (lowpass_cutoff_hz >= sample_rate_hz / 2.0)
        throw config_error("lowpass cutoff must be strictly below Nyquist (" +
                           std::to_string(sample_rate_hz / 2.0) + " Hz)");
    if (max_shift < 0 || max_mask_len < 0) throw config_error("augment lengths must be >= 0");
    if (scale_min > scale_max) throw config_error("scale range is inverted");
}

void time_shift(Window& w, int shift) {
    if (shift == 0) return;
    const int T = int(w.steps);
    std::vector<double> row(w.steps);
    for (uint32_t c = 0; c < w.channels; ++c) {
        double* v = w.values.data() + size_t(c) * w.steps;
        for (int t = 0; t < T; ++t) {
            const int src = t - shift;
            row[size_t(t)] = (src >= 0 && src < T) ? v[src] : 0.0;
        }
        std::memcpy(v, row.data(), sizeof(double) * w.steps);
    }
}

void scale(Window& w, double factor) {
    for (double& v : w.values) v *= factor;
}

void jitter(Window& w, double sigma, std::mt19937_64& rng) {
    if (sigma == 0.0) return;
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& v : w.values) v += noise(rng);
}

void time_mask(Window& w, uint32_t start, uint32_t len) {
    if (start + len > w.steps) throw shape_error("time_mask: range exceeds window length");
    for (uint32_t c = 0; c < w.channels; ++c) {
        double* v = w.values.data() + size_t(c) * w.steps;
        for (uint32_t t = start; t < start + len; ++t) v[t] = 0.0;
    }
}

void axis_flip(Window& w, uint32_t channel_mask) {
    for (uint32_t c = 0; c < w.channels; ++c) {
        if (!(channel_mask & (1u << c))) continue;
        double* v = w.values.data() + size_t(c) * w.steps;
        for (uint32_t t = 0; t < w.steps; ++t) v[t] = -v[t];
    }
}

void rotate3(Window& w, const std::array<double, 3>& axis, double angle_deg) {
    if (w.channels < 3) throw shape_error("rotate3 needs at least 3 channels");
    const double norm = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
    if (norm < 1e-12) throw shape_error("rotate3: zero axis");
    const double ux = axis[0] / norm, uy = axis[1] / norm, uz = axis[2] / norm;
    const double a = angle_deg * kPi / 180.0;
    const double c = std::cos(a), s = std::sin(a), one_c = 1.0 - c;

    // Rodrigues rotation matrix.
    const double r[3][3] = {
        {c + ux * ux * one_c, ux * uy * one_c - uz * s, ux * uz * one_c + uy * s},
        {uy * ux * one_c + uz * s, c + uy * uy * one_c, uy * uz * one_c - ux * s},
        {uz * ux * one_c - uy * s, uz * uy * one_c + ux * s, c + uz * uz * one_c},
    };

    double* x = w.values.data();
    double* y = w.values.data() + w.steps;
    double* z = w.values.data() + 2 * size_t(w.steps);
    for (uint32_t t = 0; t < w.steps; ++t) {
        const double vx = x[t], vy = y[t], vz = z[t];
        x[t] = r[0][0] * vx + r[0][1] * vy + r[0][2] * vz;
        y[t] = r[1][0] * vx + r[1][1] * vy + r[1][2] * vz;
        z[t] = r[2][0] * vx + r[2][1] * vy + r[2][2] * vz;
    }
}

std::vector<Biquad> butterworth_lowpass_sections(int order, double cutoff_hz,
                                                 double sample_rate_hz) {
    if (order <= 0 || order % 2 != 0) throw config_error("filter order must be positive and even");
    if (cutoff_hz <= 0.0 || cutoff_hz >= sample_rate_hz / 2.0)
        throw config_error("cutoff must lie in (0, fs/2)");

    const double w0 = 2.0 * kPi * cutoff_hz / sample_rate_hz;
    const double cw = std::cos(w0), sw = std::sin(w0);

    std::vector<Biquad> sections;
    for (int k = 0; k < order / 2; ++k) {
        // Pole-pair quality factors of the Butterworth prototype.
        const double q = 1.0 / (2.0 * std::sin((2.0 * k + 1.0) * kPi / (2.0 * order)));
        const double alpha = sw / (2.0 * q);
        const double a0 = 1.0 + alpha;
        Biquad s{};
        s.b0 = (1.0 - cw) / 2.0 / a0;
        s.b1 = (1.0 - cw) / a0;
        s.b2 = s.b0;
        s.a1 = -2.0 * cw / a0;
        s.a2 = (1.0 - alpha) / a0;
        sections.push_back(s);
    }
    return sections;
}

double cascade_gain_at(const std::vector<Biquad>& sections, double freq_hz,
                       double sample_rate_hz) {
    const double w = 2.0 * kPi * freq_hz / sample_rate_hz;
    const std::complex<double> z1 = std::polar(1.0, -w);
    const std::complex<double> z2 = z1 * z1;
    std::complex<double> h = 1.0;
    for (const Biquad& s : sections)
        h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
    return std::abs(h);
}

namespace {

void run_sections(std::vector<double>& x, const std::vector<Biquad>& sections) {
    if (x.empty()) return;
    for (const Biquad& s : sections) {
        // Start each section in steady state for the first sample so the
        // startup transient vanishes (a constant signal passes exactly).
        double z1 = (1.0 - s.b0) * x[0];
        double z2 = (s.b2 - s.a2) * x[0];
        for (double& v : x) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
}

// Zero-phase pass over one channel: odd-reflect both ends, filter forward,
// reverse, filter again, reverse, trim.
void filtfilt_channel(double* v, uint32_t n, const std::vector<Biquad>& sections) {
    const uint32_t pad = std::min(kPadLen, n > 1 ? n - 1 : 0);
    std::vector<double> ext(n + 2 * pad);
    for (uint32_t i = 0; i < pad; ++i) ext[i] = 2.0 * v[0] - v[pad - i];
    for (uint32_t i = 0; i < n; ++i) ext[pad + i] = v[i];
    for (uint32_t i = 0; i < pad; ++i) ext[pad + n + i] = 2.0 * v[n - 1] - v[n - 2 - i];

    run_sections(ext, sections);
    std::reverse(ext.begin(), ext.end());
    run_sections(ext, sections);
    std::reverse(ext.begin(), ext.end());

    for (uint32_t i = 0; i < n; ++i) v[i] = ext[pad + i];
}

}  // namespace

void lowpass(Window& w, double cutoff_hz, double sample_rate_hz) {
    const std::vector<Biquad> sections =
        butterworth_lowpass_sections(kFilterOrder, cutoff_hz, sample_rate_hz);
    for (uint32_t c = 0; c < w.channels; ++c)
        filtfilt_channel(w.values.data() + size_t(c) * w.steps, w.steps, sections);
}

std::mt19937_64 sample_stream(const AugmentConfig& cfg, uint64_t epoch, uint64_t sample_index) {
    return make_rng(mix_seed(cfg.seed, epoch, sample_index));
}

void apply_all(Window& w, const AugmentConfig& cfg, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> gate(0.0, 1.0);

    if (gate(rng) < cfg.probability && cfg.max_shift > 0) {
        std::uniform_int_distribution<int> d(-cfg.max_shift, cfg.max_shift);
        time_shift(w, d(rng));
    }
    if (gate(rng) < cfg.probability) {
        std::uniform_real_distribution<double> d(cfg.scale_min, cfg.scale_max);
        scale(w, d(rng));
    }
    if (gate(rng) < cfg.probability) jitter(w, cfg.jitter_sigma, rng);
    if (gate(rng) < cfg.probability && cfg.max_mask_len > 0 && w.steps > 0) {
        std::uniform_int_distribution<int> dlen(1, std::min<int>(cfg.max_mask_len, int(w.steps)));
        const uint32_t len = uint32_t(dlen(rng));
        std::uniform_int_distribution<uint32_t> dstart(0, w.steps - len);
        time_mask(w, dstart(rng), len);
    }
    if (gate(rng) < cfg.probability && w.channels > 0 && w.channels < 32) {
        // Uniform over non-empty channel subsets: inverts one or more axes.
        std::uniform_int_distribution<uint32_t> d(1, (1u << w.channels) - 1);
        axis_flip(w, d(rng));
    }
    if (gate(rng) < cfg.probability && w.channels >= 3) {
        std::normal_distribution<double> g(0.0, 1.0);
        std::array<double, 3> axis{};
        do {
            axis = {g(rng), g(rng), g(rng)};
        } while (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2] < 1e-12);
        std::uniform_real_distribution<double> dang(-cfg.max_rotation_deg, cfg.max_rotation_deg);
        rotate3(w, axis, dang(rng));
    }
    if (gate(rng) < cfg.probability) lowpass(w, cfg.lowpass_cutoff_hz, cfg.sample_rate_hz);
}

}  // namespace dwn
