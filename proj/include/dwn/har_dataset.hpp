#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dwn/thermometer.hpp"

namespace dwn {

enum class Split { train, test };

const char* split_name(Split s);

// Windowed multi-channel sensor data with integer labels. Values are stored
// as float32, [sample][channel][step]. Labels keep their original integer
// coding; class index = label - min_label.
struct SensorDataset {
    uint32_t channels = 0;
    uint32_t steps = 0;
    uint32_t num_classes = 0;
    int min_label = 0;
    std::string split_tag;

    std::vector<float> values;     // size() * channels * steps
    std::vector<int16_t> labels;   // original labels
    std::vector<int16_t> subjects; // empty when unknown

    size_t size() const { return labels.size(); }
    int label(size_t i) const { return labels[i]; }
    uint32_t class_index(size_t i) const { return uint32_t(labels[i] - min_label); }
    const float* window_data(size_t i) const {
        return values.data() + i * size_t(channels) * steps;
    }
    Window window(size_t i) const;

    SensorDataset subset(const std::vector<size_t>& indices) const;
};

// UCI-HAR raw inertial signals: 9 channels x 128 steps, labels 1..6.
// Channel order is fixed: body_acc x,y,z; body_gyro x,y,z; total_acc x,y,z.
inline constexpr uint32_t kHarChannels = 9;
inline constexpr uint32_t kHarSteps = 128;
inline constexpr uint32_t kHarClasses = 6;

extern const char* const kHarChannelNames[kHarChannels];
extern const char* const kHarClassNames[kHarClasses];

// Loads one split from the published directory layout:
//   <root>/<split>/Inertial Signals/<channel>_<split>.txt  (9 files)
//   <root>/<split>/y_<split>.txt, <root>/<split>/subject_<split>.txt
// A binary cache is written next to the sources (best effort) and reused
// while their sizes and mtimes are unchanged.
SensorDataset load_har_split(const std::string& root, Split split, bool use_cache = true);

// Counts per original label; errors on an empty dataset.
std::map<int, size_t> class_distribution(const SensorDataset& ds);

std::vector<int> distinct_subjects(const SensorDataset& ds);

}  // namespace dwn
