#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dwn {

// Rows are true classes, columns predicted. macro_f1 is the unweighted mean
// of per-class F1 = 2 TP / (2 TP + FP + FN), zero when that denominator is 0.
struct Metrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    uint32_t num_classes = 0;
    std::vector<uint64_t> confusion;  // num_classes * num_classes

    uint64_t at(uint32_t truth, uint32_t pred) const {
        return confusion[size_t(truth) * num_classes + pred];
    }
    uint64_t total() const;
};

Metrics compute_metrics(std::span<const uint32_t> truth, std::span<const uint32_t> predicted,
                        uint32_t num_classes);

double macro_f1_from_confusion(std::span<const uint64_t> confusion, uint32_t num_classes);

// Text grid with optional row labels.
std::string format_confusion(const Metrics& m, std::span<const char* const> class_names = {});

// Softmax cross-entropy over class scores. Returns the loss and
// d(loss)/d(scores) = softmax(scores) - one_hot(label).
std::pair<double, std::vector<double>> cross_entropy_grad(std::span<const double> scores,
                                                          uint32_t label);

}  // namespace dwn
