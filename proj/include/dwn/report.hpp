#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dwn/energy.hpp"
#include "dwn/frozen_model.hpp"

namespace dwn {

// One comparison row: an external model with published metrics, or a local
// frozen model (flops = 0, size measured). Negative metric values mean
// "not reported".
struct ComparisonRow {
    std::string name;
    double accuracy = -1.0;  // fraction in [0, 1]
    double f1 = -1.0;
    double size_kib = -1.0;
    uint64_t flops = 0;
    bool local = false;
};

// Baseline rows for this task's published reference models, as reported by
// their respective publications. Used when no manifest file is supplied.
std::vector<ComparisonRow> builtin_baselines();

// Manifest text: one row per line, whitespace-separated
//   name accuracy_percent f1_percent size_kib flops
// with '-' for unreported fields and '#' comments.
std::vector<ComparisonRow> parse_manifest(const std::string& path);

ComparisonRow row_from_model(const std::string& name, const FrozenModel& model,
                             double accuracy = -1.0, double f1 = -1.0);

// Comparison table with estimated energy per sample (flops * energy model);
// local LUT models run FLOP-free so their energy column is 0.
std::string render_comparison(const std::vector<ComparisonRow>& rows,
                              const EnergyModel& energy = {});

// Structure summary of local frozen models.
std::string render_model_summary(const std::vector<std::pair<std::string, const FrozenModel*>>& models);

}  // namespace dwn
