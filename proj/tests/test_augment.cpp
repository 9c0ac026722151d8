#include <cmath>
#include <random>

#include "doctest.h"
#include "dwn/augment.hpp"
#include "dwn/error.hpp"
#include "support.hpp"

using namespace dwn;

namespace {

Window ramp_window(uint32_t channels = 1, uint32_t steps = 4) {
    Window w(channels, steps);
    for (uint32_t c = 0; c < channels; ++c)
        for (uint32_t t = 0; t < steps; ++t) w.at(c, t) = double(t + 1);
    return w;
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

TEST_SUITE("augment") {

TEST_CASE("time_shift index arithmetic") {
    Window w = ramp_window();
    time_shift(w, 0);
    CHECK(w.values == std::vector<double>{1, 2, 3, 4});

    w = ramp_window();
    time_shift(w, 2);
    CHECK(w.values == std::vector<double>{0, 0, 1, 2});

    w = ramp_window();
    time_shift(w, -1);
    CHECK(w.values == std::vector<double>{2, 3, 4, 0});
}

TEST_CASE("scale multiplies all channels") {
    Window w = ramp_window(2, 2);
    scale(w, 1.0);
    CHECK(w.values == std::vector<double>{1, 2, 1, 2});
    scale(w, 1.1);
    CHECK(w.at(0, 0) == doctest::Approx(1.1));
    CHECK(w.at(1, 1) == doctest::Approx(2.2));
    Window zeros(2, 2);
    scale(zeros, 0.9);
    CHECK(zeros.values == std::vector<double>{0, 0, 0, 0});
}

TEST_CASE("jitter noise statistics over a million draws") {
    std::mt19937_64 rng(42);
    const uint32_t steps = 1000;
    Window base(1, steps);
    double sum = 0.0, sum_sq = 0.0;
    size_t n = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        Window w = base;
        jitter(w, 0.05, rng);
        for (uint32_t t = 0; t < steps; ++t) {
            const double d = w.at(0, t) - base.at(0, t);
            sum += d;
            sum_sq += d * d;
            ++n;
        }
    }
    const double mean = sum / double(n);
    const double var = sum_sq / double(n) - mean * mean;
    CHECK(std::abs(mean) < 0.001);
    CHECK(var > 0.0024);
    CHECK(var < 0.0026);

    Window w = ramp_window();
    jitter(w, 0.0, rng);
    CHECK(w.values == std::vector<double>{1, 2, 3, 4});
}

TEST_CASE("time_mask zeroes the selected columns") {
    Window w(1, 5);
    for (double& v : w.values) v = 1.0;
    time_mask(w, 0, 0);
    CHECK(w.values == std::vector<double>{1, 1, 1, 1, 1});
    time_mask(w, 2, 2);
    CHECK(w.values == std::vector<double>{1, 1, 0, 0, 1});
    time_mask(w, 0, 5);
    CHECK(w.values == std::vector<double>{0, 0, 0, 0, 0});
    CHECK_THROWS_AS(time_mask(w, 4, 2), Error);
}

TEST_CASE("axis_flip negates masked channels and is an involution") {
    Window w(1, 2);
    w.at(0, 0) = 1.0;
    w.at(0, 1) = -2.0;
    axis_flip(w, 0);
    CHECK(w.values == std::vector<double>{1, -2});
    axis_flip(w, 1);
    CHECK(w.values == std::vector<double>{-1, 2});
    axis_flip(w, 1);
    CHECK(w.values == std::vector<double>{1, -2});
}

TEST_CASE("rotate3 matches the rotation-matrix oracle and preserves norms") {
    // 10 degrees about z maps (1, 0, 0) to (cos10, sin10, 0).
    Window w(3, 1);
    w.at(0, 0) = 1.0;
    rotate3(w, {0.0, 0.0, 1.0}, 10.0);
    CHECK(w.at(0, 0) == doctest::Approx(std::cos(10.0 * kPi / 180.0)).epsilon(1e-12));
    CHECK(w.at(1, 0) == doctest::Approx(std::sin(10.0 * kPi / 180.0)).epsilon(1e-12));
    CHECK(w.at(2, 0) == doctest::Approx(0.0).epsilon(1e-12));

    Window id(3, 2);
    id.at(0, 0) = 0.3;
    id.at(1, 1) = -0.7;
    Window before = id;
    rotate3(id, {1.0, 2.0, -1.0}, 0.0);
    for (size_t i = 0; i < id.values.size(); ++i)
        CHECK(id.values[i] == doctest::Approx(before.values[i]).epsilon(1e-12));

    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    Window r(5, 16);
    for (double& v : r.values) v = g(rng);
    Window orig = r;
    rotate3(r, {g(rng), g(rng), g(rng)}, 7.5);
    for (uint32_t t = 0; t < r.steps; ++t) {
        const double n0 = std::hypot(orig.at(0, t), orig.at(1, t), orig.at(2, t));
        const double n1 = std::hypot(r.at(0, t), r.at(1, t), r.at(2, t));
        CHECK(std::abs(n0 - n1) < 1e-6);
        // channels 3+ untouched
        CHECK(r.at(3, t) == orig.at(3, t));
        CHECK(r.at(4, t) == orig.at(4, t));
    }
}

TEST_CASE("lowpass frequency response") {
    const double fs = 50.0, fc = 20.0;
    const std::vector<Biquad> sections = butterworth_lowpass_sections(4, fc, fs);

    // Oracle: designed transfer function magnitudes.
    CHECK(cascade_gain_at(sections, 0.0, fs) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cascade_gain_at(sections, fc, fs) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
    const double gain24 = cascade_gain_at(sections, 24.0, fs);
    CHECK(gain24 < 0.5);  // >= 6 dB down at 24 Hz, single pass

    // Constant signal passes unchanged (unit DC gain).
    Window dc(2, 128);
    for (double& v : dc.values) v = 0.7;
    lowpass(dc, fc, fs);
    for (double v : dc.values) CHECK(v == doctest::Approx(0.7).epsilon(1e-6));

    // 24 Hz sinusoid attenuated by at least 6 dB (zero-phase pass squares the gain).
    Window hi(1, 128);
    for (uint32_t t = 0; t < 128; ++t) hi.at(0, t) = std::sin(2.0 * kPi * 24.0 * t / fs);
    const double rms_in = std::sqrt(0.5);
    lowpass(hi, fc, fs);
    double acc = 0.0;
    for (double v : hi.values) acc += v * v;
    const double rms_out = std::sqrt(acc / 128.0);
    CHECK(rms_out / rms_in < 0.5);

    // 5 Hz sinusoid amplitude preserved within 5%.
    Window lo(1, 128);
    for (uint32_t t = 0; t < 128; ++t) lo.at(0, t) = std::sin(2.0 * kPi * 5.0 * t / fs);
    lowpass(lo, fc, fs);
    acc = 0.0;
    for (double v : lo.values) acc += v * v;
    CHECK(std::sqrt(acc / 128.0) / rms_in == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("apply_all gating and determinism") {
    AugmentConfig cfg;
    cfg.seed = 99;

    // p = 0: identity.
    cfg.probability = 0.0;
    std::mt19937_64 rng = sample_stream(cfg, 0, 0);
    Window w = ramp_window(9, 128);
    Window before = w;
    apply_all(w, cfg, rng);
    CHECK(w.values == before.values);

    // p = 1 with identity parameters on a zero window: still identity.
    AugmentConfig idc;
    idc.probability = 1.0;
    idc.max_shift = 0;
    idc.scale_min = idc.scale_max = 1.0;
    idc.jitter_sigma = 0.0;
    idc.max_mask_len = 0;
    idc.max_rotation_deg = 0.0;
    Window zeros(9, 128);
    std::mt19937_64 rng2 = sample_stream(idc, 0, 1);
    apply_all(zeros, idc, rng2);
    for (double v : zeros.values) CHECK(v == doctest::Approx(0.0).epsilon(1e-9));

    // Fixed seed: byte-identical output across runs; shape preserved.
    AugmentConfig full;
    full.seed = 1234;
    full.probability = 0.9;
    Window a(9, 128), b(9, 128);
    std::mt19937_64 ra(7);
    std::normal_distribution<double> g(0.0, 1.0);
    for (size_t i = 0; i < a.values.size(); ++i) a.values[i] = b.values[i] = g(ra);
    std::mt19937_64 s1 = sample_stream(full, 3, 17);
    std::mt19937_64 s2 = sample_stream(full, 3, 17);
    apply_all(a, full, s1);
    apply_all(b, full, s2);
    CHECK(a.values == b.values);
    CHECK(a.channels == 9);
    CHECK(a.steps == 128);

    // Different sample index: independent stream.
    Window c(9, 128);
    for (size_t i = 0; i < c.values.size(); ++i) c.values[i] = a.values[i];
    std::mt19937_64 s3 = sample_stream(full, 3, 18);
    apply_all(c, full, s3);
    CHECK(c.values != a.values);
}

TEST_CASE("config validation") {
    AugmentConfig cfg;
    cfg.probability = 1.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.probability = 0.3;
    cfg.lowpass_cutoff_hz = 25.0;  // Nyquist at fs = 50
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.lowpass_cutoff_hz = 20.0;
    CHECK_NOTHROW(cfg.validate());
}

}  // TEST_SUITE
