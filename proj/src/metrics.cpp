#include "dwn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "dwn/error.hpp"

namespace dwn {

uint64_t Metrics::total() const {
    uint64_t n = 0;
    for (uint64_t v : confusion) n += v;
    return n;
}

Metrics compute_metrics(std::span<const uint32_t> truth, std::span<const uint32_t> predicted,
                        uint32_t num_classes) {
    if (truth.size() != predicted.size())
        throw shape_error("metrics: truth and prediction counts differ");
    if (truth.empty()) throw data_error("metrics: no samples");

    Metrics m;
    m.num_classes = num_classes;
    m.confusion.assign(size_t(num_classes) * num_classes, 0);

    uint64_t correct = 0;
    for (size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= num_classes || predicted[i] >= num_classes)
            throw data_error("metrics: class index out of range");
        ++m.confusion[size_t(truth[i]) * num_classes + predicted[i]];
        if (truth[i] == predicted[i]) ++correct;
    }
    m.accuracy = double(correct) / double(truth.size());
    m.macro_f1 = macro_f1_from_confusion(m.confusion, num_classes);
    return m;
}

double macro_f1_from_confusion(std::span<const uint64_t> confusion, uint32_t num_classes) {
    double sum = 0.0;
    for (uint32_t c = 0; c < num_classes; ++c) {
        uint64_t tp = confusion[size_t(c) * num_classes + c];
        uint64_t fp = 0, fn = 0;
        for (uint32_t k = 0; k < num_classes; ++k) {
            if (k == c) continue;
            fp += confusion[size_t(k) * num_classes + c];
            fn += confusion[size_t(c) * num_classes + k];
        }
        const uint64_t denom = 2 * tp + fp + fn;
        sum += denom == 0 ? 0.0 : 2.0 * double(tp) / double(denom);
    }
    return sum / double(num_classes);
}

std::string format_confusion(const Metrics& m, std::span<const char* const> class_names) {
    std::string out = "true\\pred";
    char buf[64];
    for (uint32_t c = 0; c < m.num_classes; ++c) {
        snprintf(buf, sizeof(buf), "%8u", c);
        out += buf;
    }
    out += '\n';
    for (uint32_t r = 0; r < m.num_classes; ++r) {
        if (r < class_names.size())
            snprintf(buf, sizeof(buf), "%-9.9s", class_names[r]);
        else
            snprintf(buf, sizeof(buf), "%-9u", r);
        out += buf;
        for (uint32_t c = 0; c < m.num_classes; ++c) {
            snprintf(buf, sizeof(buf), "%8llu", (unsigned long long)m.at(r, c));
            out += buf;
        }
        out += '\n';
    }
    return out;
}

std::pair<double, std::vector<double>> cross_entropy_grad(std::span<const double> scores,
                                                          uint32_t label) {
    if (label >= scores.size()) throw data_error("cross_entropy: label out of range");
    const size_t K = scores.size();
    double max_score = scores[0];
    for (double s : scores) max_score = std::max(max_score, s);

    std::vector<double> grad(K);
    double sum = 0.0;
    for (size_t c = 0; c < K; ++c) {
        grad[c] = std::exp(scores[c] - max_score);
        sum += grad[c];
    }
    const double loss = std::log(sum) - (scores[label] - max_score);
    for (size_t c = 0; c < K; ++c) grad[c] /= sum;
    grad[label] -= 1.0;
    return {loss, std::move(grad)};
}

}  // namespace dwn
