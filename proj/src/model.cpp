#include "dwn/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <unordered_set>

#include "dwn/error.hpp"

namespace dwn {

void DwnModel::validate() const {
    if (layers.empty()) throw shape_error("model has no layers");
    if (num_classes == 0) throw shape_error("model has no classes");
    if (output_luts() % num_classes != 0)
        throw shape_error("final layer size " + std::to_string(output_luts()) +
                          " is not divisible by " + std::to_string(num_classes) + " classes");
    uint32_t width = encoder.encoded_width(encoder_steps);
    for (size_t i = 0; i < layers.size(); ++i) {
        const LutLayer& l = layers[i];
        if (l.arity < 2 || l.arity > 8)
            throw shape_error("layer " + std::to_string(i) + ": arity must be in 2..8");
        if (l.input_width != width)
            throw shape_error("layer " + std::to_string(i) + ": input width " +
                              std::to_string(l.input_width) + " != expected " +
                              std::to_string(width));
        if (l.pool_size == 0 || l.pool_size > l.input_width)
            throw shape_error("layer " + std::to_string(i) + ": pool size " +
                              std::to_string(l.pool_size) + " out of 1.." +
                              std::to_string(l.input_width));
        if (l.entry_weights.size() != size_t(l.num_luts) * l.entries_per_lut())
            throw shape_error("layer " + std::to_string(i) + ": entry tensor size mismatch");
        const size_t pins = size_t(l.num_luts) * l.arity * l.pool_size;
        if (l.mapping_logits.size() != pins || l.candidate_pools.size() != pins)
            throw shape_error("layer " + std::to_string(i) + ": mapping tensor size mismatch");
        for (uint32_t idx : l.candidate_pools)
            if (idx >= l.input_width)
                throw shape_error("layer " + std::to_string(i) + ": candidate index " +
                                  std::to_string(idx) + " out of range");
        for (double wgt : l.entry_weights)
            if (!std::isfinite(wgt))
                throw shape_error("layer " + std::to_string(i) + ": non-finite entry weight");
        width = l.num_luts;
    }
}

namespace {

// Draws `count` distinct indices from [0, width) into out.
void sample_without_replacement(uint32_t width, uint32_t count, std::mt19937_64& rng,
                                std::vector<uint32_t>& out) {
    out.clear();
    if (count == width) {
        out.resize(width);
        for (uint32_t i = 0; i < width; ++i) out[i] = i;
        std::shuffle(out.begin(), out.end(), rng);
        return;
    }
    // Floyd's algorithm; order of insertion is deterministic for the stream.
    std::unordered_set<uint32_t> seen;
    seen.reserve(count * 2);
    for (uint32_t j = width - count; j < width; ++j) {
        std::uniform_int_distribution<uint32_t> d(0, j);
        const uint32_t t = d(rng);
        if (seen.insert(t).second) {
            out.push_back(t);
        } else {
            seen.insert(j);
            out.push_back(j);
        }
    }
}

}  // namespace

DwnModel init_model(const ModelConfig& cfg, const ThermometerEncoder& encoder,
                    uint32_t encoder_steps, std::mt19937_64& rng) {
    if (cfg.layer_luts.empty()) throw config_error("model needs at least one layer");
    if (cfg.num_classes == 0) throw config_error("model needs at least one class");
    if (cfg.layer_luts.back() % cfg.num_classes != 0)
        throw config_error("final layer size " + std::to_string(cfg.layer_luts.back()) +
                           " must be divisible by num_classes " +
                           std::to_string(cfg.num_classes));

    DwnModel model;
    model.encoder = encoder;
    model.encoder_steps = encoder_steps;
    model.num_classes = cfg.num_classes;
    model.tau = cfg.tau;

    std::uniform_real_distribution<double> entry_init(-1.0, 1.0);
    std::uniform_real_distribution<double> logit_init(-0.01, 0.01);

    uint32_t width = encoder.encoded_width(encoder_steps);
    std::vector<uint32_t> pool;
    for (uint32_t L : cfg.layer_luts) {
        LutLayer layer;
        layer.num_luts = L;
        layer.arity = cfg.arity;
        layer.input_width = width;
        layer.pool_size = cfg.pool_size == 0 ? width : cfg.pool_size;
        if (layer.pool_size > width)
            throw config_error("pool size " + std::to_string(layer.pool_size) +
                               " exceeds layer input width " + std::to_string(width));

        layer.entry_weights.resize(size_t(L) * layer.entries_per_lut());
        for (double& w : layer.entry_weights) w = entry_init(rng);

        const size_t pins = size_t(L) * layer.arity * layer.pool_size;
        layer.mapping_logits.resize(pins);
        for (double& w : layer.mapping_logits) w = logit_init(rng);

        layer.candidate_pools.resize(pins);
        for (uint32_t lut = 0; lut < L; ++lut) {
            for (uint32_t pin = 0; pin < layer.arity; ++pin) {
                sample_without_replacement(width, layer.pool_size, rng, pool);
                std::copy(pool.begin(), pool.end(),
                          layer.candidate_pools.begin() + layer.pin_offset(lut, pin));
            }
        }
        width = L;
        model.layers.push_back(std::move(layer));
    }
    model.validate();
    return model;
}

Routing compute_routing(const DwnModel& model) {
    Routing r;
    r.choice.resize(model.layers.size());
    r.source.resize(model.layers.size());
    for (size_t li = 0; li < model.layers.size(); ++li) {
        const LutLayer& layer = model.layers[li];
        const size_t n_pins = size_t(layer.num_luts) * layer.arity;
        r.choice[li].resize(n_pins);
        r.source[li].resize(n_pins);
        for (size_t p = 0; p < n_pins; ++p) {
            const double* logits = layer.mapping_logits.data() + p * layer.pool_size;
            uint32_t best = 0;
            for (uint32_t c = 1; c < layer.pool_size; ++c)
                if (logits[c] > logits[best]) best = c;  // ties keep the lowest index
            r.choice[li][p] = best;
            r.source[li][p] = layer.candidate_pools[p * layer.pool_size + best];
        }
    }
    return r;
}

void forward_hard(const DwnModel& model, const Routing& routing, const EncodedSample& input,
                  ForwardTrace& trace, std::vector<double>& scores) {
    if (input.width != model.input_width())
        throw shape_error("forward: input width " + std::to_string(input.width) +
                          " != model input width " + std::to_string(model.input_width()));

    trace.layers.resize(model.layers.size());
    const std::vector<uint8_t>* in_bits = &input.bits;

    for (size_t li = 0; li < model.layers.size(); ++li) {
        const LutLayer& layer = model.layers[li];
        LayerTrace& lt = trace.layers[li];
        lt.input_bits = *in_bits;
        lt.addresses.resize(layer.num_luts);
        lt.outputs.resize(layer.num_luts);

        const uint32_t* sources = routing.source[li].data();
        const uint8_t* bits = lt.input_bits.data();
        for (uint32_t lut = 0; lut < layer.num_luts; ++lut) {
            uint32_t addr = 0;
            const uint32_t* src = sources + size_t(lut) * layer.arity;
            for (uint32_t pin = 0; pin < layer.arity; ++pin)
                addr |= uint32_t(bits[src[pin]]) << pin;
            lt.addresses[lut] = addr;
            lt.outputs[lut] = layer.entry_weights[layer.entry_index(lut, addr)] > 0.0 ? 1 : 0;
        }
        in_bits = &lt.outputs;
    }

    const uint32_t K = model.num_classes;
    const uint32_t G = model.group_size();
    scores.assign(K, 0.0);
    const std::vector<uint8_t>& out = trace.layers.back().outputs;
    for (uint32_t c = 0; c < K; ++c) {
        uint32_t pop = 0;
        for (uint32_t g = 0; g < G; ++g) pop += out[size_t(c) * G + g];
        scores[c] = model.tau * double(pop) / double(G);
    }
}

std::vector<double> forward_hard(const DwnModel& model, const EncodedSample& input,
                                 ForwardTrace* trace) {
    const Routing routing = compute_routing(model);
    ForwardTrace local;
    ForwardTrace& t = trace ? *trace : local;
    std::vector<double> scores;
    forward_hard(model, routing, input, t, scores);
    return scores;
}

Gradients Gradients::zeros_like(const DwnModel& model) {
    Gradients g;
    g.layers.resize(model.layers.size());
    for (size_t i = 0; i < model.layers.size(); ++i) {
        g.layers[i].entries.assign(model.layers[i].entry_weights.size(), 0.0);
        g.layers[i].logits.assign(model.layers[i].mapping_logits.size(), 0.0);
    }
    return g;
}

void Gradients::add_scaled(const Gradients& other, double factor) {
    for (size_t i = 0; i < layers.size(); ++i) {
        for (size_t j = 0; j < layers[i].entries.size(); ++j)
            layers[i].entries[j] += factor * other.layers[i].entries[j];
        for (size_t j = 0; j < layers[i].logits.size(); ++j)
            layers[i].logits[j] += factor * other.layers[i].logits[j];
    }
}

void Gradients::clear() {
    for (LayerGrads& l : layers) {
        std::fill(l.entries.begin(), l.entries.end(), 0.0);
        std::fill(l.logits.begin(), l.logits.end(), 0.0);
    }
}

EfdContext::EfdContext(const DwnModel& model) : routing(compute_routing(model)) {
    softmax.resize(model.layers.size());
    for (size_t li = 0; li < model.layers.size(); ++li) {
        const LutLayer& layer = model.layers[li];
        softmax[li].resize(layer.mapping_logits.size());
        const size_t n_pins = size_t(layer.num_luts) * layer.arity;
        for (size_t p = 0; p < n_pins; ++p) {
            const double* logits = layer.mapping_logits.data() + p * layer.pool_size;
            double* s = softmax[li].data() + p * layer.pool_size;
            double max_logit = logits[0];
            for (uint32_t c = 1; c < layer.pool_size; ++c) max_logit = std::max(max_logit, logits[c]);
            double sum = 0.0;
            for (uint32_t c = 0; c < layer.pool_size; ++c) {
                s[c] = std::exp(logits[c] - max_logit);
                sum += s[c];
            }
            const double inv = 1.0 / sum;
            for (uint32_t c = 0; c < layer.pool_size; ++c) s[c] *= inv;
        }
    }
}

void backward_efd(const DwnModel& model, const EfdContext& ctx, const ForwardTrace& trace,
                  std::span<const double> upstream, const EfdOptions& opts, Gradients& acc) {
    if (trace.layers.size() != model.layers.size())
        throw shape_error("backward: trace layer count mismatch");
    if (upstream.size() != model.num_classes)
        throw shape_error("backward: upstream size mismatch");
    if (acc.layers.size() != model.layers.size())
        throw shape_error("backward: gradient accumulator shape mismatch");

    const uint32_t K = model.num_classes;
    const uint32_t G = model.group_size();

    // d(loss)/d(output bit) of the layer currently being processed.
    std::vector<double> out_grad(model.output_luts());
    for (uint32_t c = 0; c < K; ++c) {
        const double g = upstream[c] * model.tau / double(G);
        for (uint32_t i = 0; i < G; ++i) out_grad[size_t(c) * G + i] = g;
    }

    std::vector<double> in_grad;
    for (size_t li = model.layers.size(); li-- > 0;) {
        const LutLayer& layer = model.layers[li];
        const LayerTrace& lt = trace.layers[li];
        if (lt.addresses.size() != layer.num_luts || lt.input_bits.size() != layer.input_width)
            throw shape_error("backward: trace shape mismatch at layer " + std::to_string(li));

        Gradients::LayerGrads& lg = acc.layers[li];
        const std::vector<double>& softmax = ctx.softmax[li];
        const std::vector<uint32_t>& sources = ctx.routing.source[li];
        const uint8_t* bits = lt.input_bits.data();

        const bool propagate = li > 0;
        if (propagate) in_grad.assign(layer.input_width, 0.0);

        for (uint32_t lut = 0; lut < layer.num_luts; ++lut) {
            const double g = out_grad[lut];
            if (g == 0.0) continue;
            const uint32_t addr = lt.addresses[lut];
            const double* w = layer.entry_weights.data() + layer.entry_index(lut, 0);
            double* we_grad = lg.entries.data() + layer.entry_index(lut, 0);

            // Entry gradients: delta at the addressed entry, optionally
            // spread over a Hamming neighborhood.
            if (opts.radius <= 0) {
                we_grad[addr] += g;
            } else {
                const uint32_t n_entries = layer.entries_per_lut();
                for (uint32_t u = 0; u < n_entries; ++u) {
                    const int d = std::popcount(u ^ addr);
                    if (d <= opts.radius) we_grad[u] += g * std::pow(opts.lambda, d);
                }
            }

            for (uint32_t pin = 0; pin < layer.arity; ++pin) {
                // One-bit-flip finite difference on the real entry weights.
                const double dpin = w[addr | (1u << pin)] - w[addr & ~(1u << pin)];
                const double g_pin = g * dpin;
                if (g_pin == 0.0) continue;

                const size_t pin_off = layer.pin_offset(lut, pin);
                const double* s = softmax.data() + pin_off;
                const uint32_t* pool = layer.candidate_pools.data() + pin_off;
                double* l_grad = lg.logits.data() + pin_off;

                // p_bar = sum_c s_c x_c over the candidate pool.
                double p_bar = 0.0;
                for (uint32_t c = 0; c < layer.pool_size; ++c)
                    if (bits[pool[c]]) p_bar += s[c];

                const double neg = g_pin * p_bar;
                for (uint32_t c = 0; c < layer.pool_size; ++c)
                    l_grad[c] += s[c] * (bits[pool[c]] ? g_pin - neg : -neg);

                if (propagate) in_grad[sources[size_t(lut) * layer.arity + pin]] += g_pin;
            }
        }
        if (propagate) std::swap(out_grad, in_grad);
    }
}

Gradients backward_efd(const DwnModel& model, const ForwardTrace& trace,
                       std::span<const double> upstream, const EfdOptions& opts) {
    const EfdContext ctx(model);
    Gradients acc = Gradients::zeros_like(model);
    backward_efd(model, ctx, trace, upstream, opts, acc);
    return acc;
}

}  // namespace dwn
