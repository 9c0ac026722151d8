#include "dwn/soft_model.hpp"

#include <cmath>
#include <string>

#include "dwn/error.hpp"

namespace dwn {

double squash_entry(double w, EntrySquash squash) {
    switch (squash) {
        case EntrySquash::logistic: return 1.0 / (1.0 + std::exp(-4.0 * w));
        case EntrySquash::identity: return w;
        case EntrySquash::step: return w > 0.0 ? 1.0 : 0.0;
    }
    return 0.0;
}

double squash_entry_grad(double w, EntrySquash squash) {
    switch (squash) {
        case EntrySquash::logistic: {
            const double s = 1.0 / (1.0 + std::exp(-4.0 * w));
            return 4.0 * s * (1.0 - s);
        }
        case EntrySquash::identity: return 1.0;
        case EntrySquash::step: return 0.0;
    }
    return 0.0;
}

namespace {

struct SoftTape {
    // Per layer: inputs (width), pin values [num_luts * arity], outputs [num_luts],
    // and the per-pin softmax (empty under hard mapping).
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> pins;
    std::vector<std::vector<double>> outputs;
    std::vector<std::vector<double>> softmax;
};

void softmax_row(const double* logits, uint32_t n, double* out) {
    double max_logit = logits[0];
    for (uint32_t c = 1; c < n; ++c) max_logit = std::max(max_logit, logits[c]);
    double sum = 0.0;
    for (uint32_t c = 0; c < n; ++c) {
        out[c] = std::exp(logits[c] - max_logit);
        sum += out[c];
    }
    for (uint32_t c = 0; c < n; ++c) out[c] /= sum;
}

uint32_t argmax_row(const double* logits, uint32_t n) {
    uint32_t best = 0;
    for (uint32_t c = 1; c < n; ++c)
        if (logits[c] > logits[best]) best = c;
    return best;
}

SoftTape run_forward(const DwnModel& model, std::span<const double> soft_bits,
                     const SoftOptions& opts) {
    if (soft_bits.size() != model.input_width())
        throw shape_error("soft_forward: input width " + std::to_string(soft_bits.size()) +
                          " != model input width " + std::to_string(model.input_width()));
    for (double b : soft_bits)
        if (!(b >= 0.0 && b <= 1.0))
            throw data_error("soft_forward: soft bit " + std::to_string(b) +
                             " outside [0, 1]");

    SoftTape tape;
    const size_t n_layers = model.layers.size();
    tape.inputs.resize(n_layers);
    tape.pins.resize(n_layers);
    tape.outputs.resize(n_layers);
    tape.softmax.resize(n_layers);

    std::vector<double> current(soft_bits.begin(), soft_bits.end());
    for (size_t li = 0; li < n_layers; ++li) {
        const LutLayer& layer = model.layers[li];
        tape.inputs[li] = current;
        tape.pins[li].resize(size_t(layer.num_luts) * layer.arity);
        tape.outputs[li].resize(layer.num_luts);
        if (!opts.hard_mapping) tape.softmax[li].resize(layer.mapping_logits.size());

        for (uint32_t lut = 0; lut < layer.num_luts; ++lut) {
            double p[8];
            for (uint32_t pin = 0; pin < layer.arity; ++pin) {
                const size_t pin_off = layer.pin_offset(lut, pin);
                const uint32_t* pool = layer.candidate_pools.data() + pin_off;
                double value;
                if (opts.hard_mapping) {
                    const uint32_t best =
                        argmax_row(layer.mapping_logits.data() + pin_off, layer.pool_size);
                    value = current[pool[best]];
                } else {
                    double* s = tape.softmax[li].data() + pin_off;
                    softmax_row(layer.mapping_logits.data() + pin_off, layer.pool_size, s);
                    value = 0.0;
                    for (uint32_t c = 0; c < layer.pool_size; ++c)
                        value += s[c] * current[pool[c]];
                }
                p[pin] = value;
                tape.pins[li][size_t(lut) * layer.arity + pin] = value;
            }

            // Full multilinear expansion over the 2^n entries.
            const double* w = layer.entry_weights.data() + layer.entry_index(lut, 0);
            const uint32_t n_entries = layer.entries_per_lut();
            double out = 0.0;
            for (uint32_t u = 0; u < n_entries; ++u) {
                double prob = 1.0;
                for (uint32_t pin = 0; pin < layer.arity; ++pin)
                    prob *= (u >> pin) & 1u ? p[pin] : 1.0 - p[pin];
                out += prob * squash_entry(w[u], opts.squash);
            }
            tape.outputs[li][lut] = out;
        }
        current = tape.outputs[li];
    }
    return tape;
}

std::vector<double> head_scores(const DwnModel& model, const std::vector<double>& final_out) {
    const uint32_t K = model.num_classes;
    const uint32_t G = model.group_size();
    std::vector<double> scores(K, 0.0);
    for (uint32_t c = 0; c < K; ++c) {
        double pop = 0.0;
        for (uint32_t g = 0; g < G; ++g) pop += final_out[size_t(c) * G + g];
        scores[c] = model.tau * pop / double(G);
    }
    return scores;
}

}  // namespace

std::vector<double> soft_forward(const DwnModel& model, std::span<const double> soft_bits,
                                 const SoftOptions& opts) {
    const SoftTape tape = run_forward(model, soft_bits, opts);
    return head_scores(model, tape.outputs.back());
}

SoftGradients soft_gradients(const DwnModel& model, std::span<const double> soft_bits,
                             std::span<const double> upstream, const SoftOptions& opts) {
    if (upstream.size() != model.num_classes)
        throw shape_error("soft_gradients: upstream size mismatch");

    const SoftTape tape = run_forward(model, soft_bits, opts);

    SoftGradients result;
    result.params = Gradients::zeros_like(model);

    const uint32_t K = model.num_classes;
    const uint32_t G = model.group_size();
    std::vector<double> out_grad(model.output_luts());
    for (uint32_t c = 0; c < K; ++c) {
        const double g = upstream[c] * model.tau / double(G);
        for (uint32_t i = 0; i < G; ++i) out_grad[size_t(c) * G + i] = g;
    }

    std::vector<double> in_grad;
    for (size_t li = model.layers.size(); li-- > 0;) {
        const LutLayer& layer = model.layers[li];
        Gradients::LayerGrads& lg = result.params.layers[li];
        const std::vector<double>& inputs = tape.inputs[li];
        in_grad.assign(layer.input_width, 0.0);

        for (uint32_t lut = 0; lut < layer.num_luts; ++lut) {
            const double g = out_grad[lut];
            const double* p = tape.pins[li].data() + size_t(lut) * layer.arity;
            const double* w = layer.entry_weights.data() + layer.entry_index(lut, 0);
            double* we_grad = lg.entries.data() + layer.entry_index(lut, 0);
            const uint32_t n_entries = layer.entries_per_lut();

            // d(out)/d(entry u) = prob_u * squash'(w_u);
            // d(out)/d(pin j) accumulated from the same expansion.
            double dpin[8] = {0, 0, 0, 0, 0, 0, 0, 0};
            for (uint32_t u = 0; u < n_entries; ++u) {
                double prob = 1.0;
                for (uint32_t pin = 0; pin < layer.arity; ++pin)
                    prob *= (u >> pin) & 1u ? p[pin] : 1.0 - p[pin];
                we_grad[u] += g * prob * squash_entry_grad(w[u], opts.squash);

                const double sq = squash_entry(w[u], opts.squash);
                for (uint32_t pin = 0; pin < layer.arity; ++pin) {
                    double partial = 1.0;
                    for (uint32_t k = 0; k < layer.arity; ++k) {
                        if (k == pin) continue;
                        partial *= (u >> k) & 1u ? p[k] : 1.0 - p[k];
                    }
                    dpin[pin] += ((u >> pin) & 1u ? 1.0 : -1.0) * partial * sq;
                }
            }

            for (uint32_t pin = 0; pin < layer.arity; ++pin) {
                const double g_pin = g * dpin[pin];
                const size_t pin_off = layer.pin_offset(lut, pin);
                const uint32_t* pool = layer.candidate_pools.data() + pin_off;
                if (opts.hard_mapping) {
                    const uint32_t best =
                        argmax_row(layer.mapping_logits.data() + pin_off, layer.pool_size);
                    in_grad[pool[best]] += g_pin;
                } else {
                    const double* s = tape.softmax[li].data() + pin_off;
                    const double pj = p[pin];
                    double* l_grad = lg.logits.data() + pin_off;
                    for (uint32_t c = 0; c < layer.pool_size; ++c) {
                        l_grad[c] += g_pin * s[c] * (inputs[pool[c]] - pj);
                        in_grad[pool[c]] += g_pin * s[c];
                    }
                }
            }
        }
        out_grad = in_grad;
    }

    result.inputs = std::move(out_grad);
    return result;
}

}  // namespace dwn
