#include <cmath>
#include <random>

#include "doctest.h"
#include "dwn/error.hpp"
#include "dwn/model.hpp"
#include "dwn/soft_model.hpp"
#include "support.hpp"

using namespace dwn;
using namespace dwn::testing;

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Central finite differences of upstream . soft_forward(model, bits) with
// respect to every entry weight, mapping logit, and input bit.
struct FdGrads {
    Gradients params;
    std::vector<double> inputs;
};

FdGrads finite_difference(DwnModel model, std::vector<double> bits,
                          std::span<const double> upstream, const SoftOptions& opts,
                          double h = 1e-4) {
    FdGrads out;
    out.params = Gradients::zeros_like(model);
    auto eval = [&] { return dot(upstream, soft_forward(model, bits, opts)); };

    for (size_t li = 0; li < model.layers.size(); ++li) {
        LutLayer& layer = model.layers[li];
        for (size_t i = 0; i < layer.entry_weights.size(); ++i) {
            const double saved = layer.entry_weights[i];
            layer.entry_weights[i] = saved + h;
            const double up = eval();
            layer.entry_weights[i] = saved - h;
            const double down = eval();
            layer.entry_weights[i] = saved;
            out.params.layers[li].entries[i] = (up - down) / (2.0 * h);
        }
        for (size_t i = 0; i < layer.mapping_logits.size(); ++i) {
            const double saved = layer.mapping_logits[i];
            layer.mapping_logits[i] = saved + h;
            const double up = eval();
            layer.mapping_logits[i] = saved - h;
            const double down = eval();
            layer.mapping_logits[i] = saved;
            out.params.layers[li].logits[i] = (up - down) / (2.0 * h);
        }
    }
    out.inputs.resize(bits.size());
    for (size_t i = 0; i < bits.size(); ++i) {
        const double saved = bits[i];
        bits[i] = saved + h;
        const double up = eval();
        bits[i] = saved - h;
        const double down = eval();
        bits[i] = saved;
        out.inputs[i] = (up - down) / (2.0 * h);
    }
    return out;
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1e-3, std::abs(a), std::abs(b)});
}

double max_rel_err(const Gradients& a, const Gradients& b) {
    double worst = 0.0;
    for (size_t li = 0; li < a.layers.size(); ++li) {
        for (size_t i = 0; i < a.layers[li].entries.size(); ++i)
            worst = std::max(worst, rel_err(a.layers[li].entries[i], b.layers[li].entries[i]));
        for (size_t i = 0; i < a.layers[li].logits.size(); ++i)
            worst = std::max(worst, rel_err(a.layers[li].logits[i], b.layers[li].logits[i]));
    }
    return worst;
}

double max_abs_diff(const Gradients& a, const Gradients& b) {
    double worst = 0.0;
    for (size_t li = 0; li < a.layers.size(); ++li) {
        for (size_t i = 0; i < a.layers[li].entries.size(); ++i)
            worst = std::max(worst, std::abs(a.layers[li].entries[i] - b.layers[li].entries[i]));
        for (size_t i = 0; i < a.layers[li].logits.size(); ++i)
            worst = std::max(worst, std::abs(a.layers[li].logits[i] - b.layers[li].logits[i]));
    }
    return worst;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("LUT-2 AND truth table") {
    // Entries ordered u = 00, 01, 10, 11; only 11 positive.
    const ThermometerEncoder enc = make_toy_encoder(2, 1);
    const DwnModel m = make_manual_model(enc, 1, 1, 1.0, {{{0, 1}}}, {{{-1, -1, -1, 1}}});

    for (uint32_t a = 0; a < 2; ++a) {
        for (uint32_t b = 0; b < 2; ++b) {
            const EncodedSample s = bits_sample({uint8_t(a), uint8_t(b)});
            ForwardTrace trace;
            const std::vector<double> scores = forward_hard(m, s, &trace);
            CHECK(trace.layers[0].outputs[0] == (a && b ? 1 : 0));
            CHECK(scores[0] == doctest::Approx(a && b ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("all-negative entries give zero scores") {
    std::mt19937_64 rng(5);
    DwnModel m = make_random_model(rng, 16, 8, 3, 4, 2);
    for (LutLayer& l : m.layers)
        for (double& w : l.entry_weights) w = -std::abs(w) - 0.1;
    const std::vector<uint8_t> bits = random_bits(rng, 16);
    const std::vector<double> scores = forward_hard(m, bits_sample(bits));
    for (double s : scores) CHECK(s == 0.0);
}

TEST_CASE("head normalization: popcounts (3,1), G=3, tau=1") {
    const ThermometerEncoder enc = make_toy_encoder(1, 1);
    // Six LUT-2s reading the single input bit twice; entry 0 decides the
    // output for an all-zero input. Group 0 -> 3 ones, group 1 -> 1 one.
    std::vector<std::vector<uint32_t>> sources(6, {0, 0});
    std::vector<std::vector<double>> weights = {
        {1, -1, -1, -1}, {1, -1, -1, -1}, {1, -1, -1, -1},
        {1, -1, -1, -1}, {-1, 1, 1, 1},   {-1, 1, 1, 1},
    };
    const DwnModel m = make_manual_model(enc, 1, 2, 1.0, {sources}, {weights});
    const std::vector<double> scores = forward_hard(m, bits_sample({0}));
    CHECK(scores[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(scores[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("score invariance under positive rescaling of entries") {
    std::mt19937_64 rng(21);
    DwnModel m = make_random_model(rng, 12, 6, 3, 6, 3);
    const std::vector<uint8_t> bits = random_bits(rng, 12);
    const std::vector<double> before = forward_hard(m, bits_sample(bits));
    for (LutLayer& l : m.layers)
        for (double& w : l.entry_weights) w *= 37.5;
    const std::vector<double> after = forward_hard(m, bits_sample(bits));
    for (size_t c = 0; c < before.size(); ++c)
        CHECK(before[c] == doctest::Approx(after[c]).epsilon(1e-12));
}

TEST_CASE("address bit order: pin 0 is the least significant bit") {
    const ThermometerEncoder enc = make_toy_encoder(4, 1);
    const DwnModel m =
        make_manual_model(enc, 1, 1, 1.0, {{{0, 1, 2, 3}}},
                          {{std::vector<double>(16, 1.0)}});
    for (uint32_t a = 0; a < 16; ++a) {
        std::vector<uint8_t> bits(4);
        for (uint32_t pin = 0; pin < 4; ++pin) bits[pin] = (a >> pin) & 1u;
        ForwardTrace trace;
        (void)forward_hard(m, bits_sample(bits), &trace);
        REQUIRE(trace.layers[0].addresses[0] == a);
    }
}

TEST_CASE("init_model: determinism, permutation pools, pool bound") {
    const ThermometerEncoder enc = make_toy_encoder(2, 4);
    ModelConfig mc;
    mc.layer_luts = {6};
    mc.arity = 3;
    mc.pool_size = 8;  // == input width
    mc.num_classes = 2;

    std::mt19937_64 r1(77), r2(77);
    const DwnModel m1 = init_model(mc, enc, 1, r1);
    const DwnModel m2 = init_model(mc, enc, 1, r2);
    CHECK(m1.layers[0].entry_weights == m2.layers[0].entry_weights);
    CHECK(m1.layers[0].mapping_logits == m2.layers[0].mapping_logits);
    CHECK(m1.layers[0].candidate_pools == m2.layers[0].candidate_pools);

    // Full-width pool is a permutation of all indices.
    const LutLayer& l = m1.layers[0];
    for (uint32_t lut = 0; lut < l.num_luts; ++lut) {
        for (uint32_t pin = 0; pin < l.arity; ++pin) {
            std::vector<uint8_t> seen(8, 0);
            for (uint32_t c = 0; c < l.pool_size; ++c)
                seen[l.candidate_pools[l.pin_offset(lut, pin) + c]] = 1;
            for (uint8_t s : seen) REQUIRE(s == 1);
        }
    }

    mc.pool_size = 9;  // above input width
    std::mt19937_64 r3(77);
    CHECK_THROWS_AS((void)init_model(mc, enc, 1, r3), Error);
}

TEST_CASE("soft LUT semantics: symmetric pins and Bernoulli degeneracy") {
    const ThermometerEncoder enc = make_toy_encoder(2, 1);
    const std::vector<double> w = {0.3, -0.8, 0.5, 1.2};
    const DwnModel m = make_manual_model(enc, 1, 1, 1.0, {{{0, 1}}}, {{w}});

    // All pins at one half: output is the mean of the squashed entries.
    const std::vector<double> half = {0.5, 0.5};
    const std::vector<double> s1 = soft_forward(m, half);
    double mean = 0.0;
    for (double v : w) mean += squash_entry(v, EntrySquash::logistic);
    mean /= 4.0;
    CHECK(s1[0] == doctest::Approx(mean).epsilon(1e-12));

    // Saturated pins pick out one entry exactly.
    for (uint32_t a = 0; a < 4; ++a) {
        const std::vector<double> pins = {double(a & 1u), double((a >> 1) & 1u)};
        const std::vector<double> s = soft_forward(m, pins);
        CHECK(s[0] == doctest::Approx(squash_entry(w[a], EntrySquash::logistic)).epsilon(1e-12));
    }

    CHECK_THROWS_AS((void)soft_forward(m, std::vector<double>{1.2, 0.0}), Error);
}

TEST_CASE("soft gradients match central finite differences (random LUT-3)") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> bit(0.05, 0.95);
    for (int trial = 0; trial < 20; ++trial) {
        DwnModel m = make_random_model(rng, 9, 3, 3, 3, 3);
        std::vector<double> bits(9);
        for (double& b : bits) b = bit(rng);
        std::vector<double> upstream = {0.7, -1.3, 0.4};

        const SoftGradients analytic = soft_gradients(m, bits, upstream);
        const FdGrads fd = finite_difference(m, bits, upstream, {});
        CHECK(max_rel_err(analytic.params, fd.params) < 1e-4);
        for (size_t i = 0; i < bits.size(); ++i)
            CHECK(rel_err(analytic.inputs[i], fd.inputs[i]) < 1e-4);
    }
}

TEST_CASE("soft/hard agreement in comparison mode") {
    // Step squash + hardened mapping + saturated bits == hard forward.
    std::mt19937_64 rng(41);
    SoftOptions cmp;
    cmp.squash = EntrySquash::step;
    cmp.hard_mapping = true;
    for (int trial = 0; trial < 25; ++trial) {
        const DwnModel m = make_random_model(rng, 14, 8, 3, 5, 2);
        const std::vector<uint8_t> bits = random_bits(rng, 14);
        std::vector<double> soft_bits(bits.begin(), bits.end());
        const std::vector<double> hard = forward_hard(m, bits_sample(bits));
        const std::vector<double> soft = soft_forward(m, soft_bits, cmp);
        for (size_t c = 0; c < hard.size(); ++c)
            REQUIRE(hard[c] == doctest::Approx(soft[c]).epsilon(1e-12));
    }
}

TEST_CASE("EFD entry delta and pin differences (worked LUT-2)") {
    // w ordered u = 00, 01, 10, 11; hard address 10.
    const ThermometerEncoder enc = make_toy_encoder(2, 1);
    const std::vector<double> w = {0.2, -0.5, 0.7, 0.1};

    // Two first-layer buffer LUTs (identity on their pin) produce pins
    // (0, 1); their entry gradients then equal the second layer's pin
    // gradients: d/d pin1 = w[10] - w[00] = 0.5, d/d pin0 = w[11] - w[10] = -0.6.
    const std::vector<std::vector<uint32_t>> l1_src = {{0, 0}, {1, 1}};
    const std::vector<std::vector<double>> l1_w = {
        {-1, 1, 1, 1},  // identity on bit 0: output = bit
        {-1, 1, 1, 1},  // identity on bit 1
    };
    const DwnModel m = make_manual_model(enc, 1, 1, 1.0, {l1_src, {{0, 1}}}, {l1_w, {w}});

    // Input bits (0, 1): layer-1 outputs (0, 1) -> address 10 in the top LUT.
    ForwardTrace trace;
    (void)forward_hard(m, bits_sample({0, 1}), &trace);
    REQUIRE(trace.layers[1].addresses[0] == 2);

    const std::vector<double> upstream = {1.0};
    const Gradients g = backward_efd(m, trace, upstream);

    // Entry gradient: delta at the addressed entry (r = 0).
    CHECK(g.layers[1].entries == std::vector<double>{0, 0, 1, 0});

    // Pin gradients appear as the buffer LUTs' entry gradients at their
    // addresses (LUT0 read bit 0 = 0 -> address 00; LUT1 read bit 1 -> 11).
    CHECK(g.layers[0].entries[0] == doctest::Approx(-0.6).epsilon(1e-12));  // pin 0
    CHECK(g.layers[0].entries[4 + 3] == doctest::Approx(0.5).epsilon(1e-12));  // pin 1
}

TEST_CASE("EFD mapping-logit gradient formula") {
    // Single LUT-2, pin pools of size 2 with equal logits: s = (1/2, 1/2).
    const ThermometerEncoder enc = make_toy_encoder(4, 1);
    DwnModel m;
    m.encoder = enc;
    m.encoder_steps = 1;
    m.num_classes = 1;
    m.tau = 1.0;
    LutLayer layer;
    layer.num_luts = 1;
    layer.arity = 2;
    layer.pool_size = 2;
    layer.input_width = 4;
    layer.entry_weights = {0.2, -0.5, 0.7, 0.1};
    layer.mapping_logits = {0.0, 0.0, 0.0, 0.0};
    layer.candidate_pools = {0, 1, 2, 3};  // pin0: bits {0,1}; pin1: bits {2,3}
    m.layers.push_back(layer);
    m.validate();

    // Input (1, 0, 0, 1): pin0 reads bit 0 = 1 (argmax tie -> candidate 0),
    // pin1 reads bit 2 = 0 -> address 01.
    ForwardTrace trace;
    (void)forward_hard(m, bits_sample({1, 0, 0, 1}), &trace);
    REQUIRE(trace.layers[0].addresses[0] == 1);

    const Gradients g = backward_efd(m, trace, std::vector<double>{2.0});

    // Hand-applied rules: head gives gradient 2 on the LUT output.
    // pin0: w[01] - w[00] = -0.5 - 0.2 = -0.7, chained: -1.4
    // pin1: w[11] - w[01] = 0.1 - (-0.5) = 0.6, chained: 1.2
    // pin0 candidates bits (1, 0), p_bar = 0.5: dlogit = g_pin * s_c * (x - p_bar)
    CHECK(g.layers[0].logits[0] == doctest::Approx(-1.4 * 0.5 * 0.5).epsilon(1e-12));
    CHECK(g.layers[0].logits[1] == doctest::Approx(-1.4 * 0.5 * -0.5).epsilon(1e-12));
    // pin1 candidates bits (0, 1), p_bar = 0.5
    CHECK(g.layers[0].logits[2] == doctest::Approx(1.2 * 0.5 * -0.5).epsilon(1e-12));
    CHECK(g.layers[0].logits[3] == doctest::Approx(1.2 * 0.5 * 0.5).epsilon(1e-12));
}

TEST_CASE("EFD neighborhood weighting with radius > 0") {
    const ThermometerEncoder enc = make_toy_encoder(2, 1);
    const DwnModel m =
        make_manual_model(enc, 1, 1, 1.0, {{{0, 1}}}, {{{0.2, -0.5, 0.7, 0.1}}});
    ForwardTrace trace;
    (void)forward_hard(m, bits_sample({0, 1}), &trace);  // address 10

    EfdOptions opts;
    opts.radius = 1;
    opts.lambda = 0.5;
    const Gradients g = backward_efd(m, trace, std::vector<double>{1.0}, opts);
    // ham(u, 10): u=00 -> 1, u=01 -> 2, u=10 -> 0, u=11 -> 1.
    CHECK(g.layers[0].entries[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g.layers[0].entries[1] == doctest::Approx(0.0));
    CHECK(g.layers[0].entries[2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.layers[0].entries[3] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("anchor: EFD equals the soft oracle exactly at saturated pins") {
    // pool_size 1 keeps every pin saturated; intermediate entries in {0, 1}
    // make the soft layer outputs identical to the hard bits, so the whole
    // recursive backward pass must agree with the multilinear derivative.
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> real_w(-1.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    SoftOptions ident;
    ident.squash = EntrySquash::identity;

    for (int trial = 0; trial < 40; ++trial) {
        const uint32_t in_bits = 10;
        const uint32_t arity = 2 + uint32_t(trial % 3);
        const uint32_t hidden = 6;
        const uint32_t out_luts = 4;
        ThermometerEncoder enc = make_toy_encoder(1, in_bits);
        ModelConfig mc;
        mc.layer_luts = trial % 2 == 0 ? std::vector<uint32_t>{out_luts}
                                       : std::vector<uint32_t>{hidden, out_luts};
        mc.arity = arity;
        mc.pool_size = 1;
        mc.tau = 1.0 + double(trial % 5);
        mc.num_classes = 2;
        DwnModel m = init_model(mc, enc, 1, rng);

        // Hidden layers: entries in {0, 1}; final layer: arbitrary reals.
        for (size_t li = 0; li + 1 < m.layers.size(); ++li)
            for (double& w : m.layers[li].entry_weights) w = coin(rng) ? 1.0 : 0.0;
        for (double& w : m.layers.back().entry_weights) w = real_w(rng);

        std::vector<uint8_t> bits = random_bits(rng, in_bits);
        std::vector<double> soft_bits(bits.begin(), bits.end());
        std::vector<double> upstream = {real_w(rng), real_w(rng)};

        ForwardTrace trace;
        (void)forward_hard(m, bits_sample(bits), &trace);
        const Gradients efd = backward_efd(m, trace, upstream);
        const SoftGradients soft = soft_gradients(m, soft_bits, upstream, ident);

        REQUIRE(max_abs_diff(efd, soft.params) <= 1e-12);
    }
}

TEST_CASE("shape errors") {
    std::mt19937_64 rng(61);
    const DwnModel m = make_random_model(rng, 8, 4, 2, 4, 2);
    CHECK_THROWS_AS((void)forward_hard(m, bits_sample(random_bits(rng, 7))), Error);

    ForwardTrace trace;
    (void)forward_hard(m, bits_sample(random_bits(rng, 8)), &trace);
    CHECK_THROWS_AS((void)backward_efd(m, trace, std::vector<double>{1.0}), Error);  // K = 2
    ForwardTrace bad = trace;
    bad.layers.pop_back();
    CHECK_THROWS_AS((void)backward_efd(m, bad, std::vector<double>{1.0, 0.0}), Error);
}

}  // TEST_SUITE
