#include "dwn/har_dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include "dwn/error.hpp"

namespace fs = std::filesystem;

namespace dwn {

const char* const kHarChannelNames[kHarChannels] = {
    "body_acc_x", "body_acc_y", "body_acc_z",
    "body_gyro_x", "body_gyro_y", "body_gyro_z",
    "total_acc_x", "total_acc_y", "total_acc_z",
};

const char* const kHarClassNames[kHarClasses] = {
    "walking", "walking_upstairs", "walking_downstairs", "sitting", "standing", "laying",
};

const char* split_name(Split s) { return s == Split::train ? "train" : "test"; }

Window SensorDataset::window(size_t i) const {
    Window w(channels, steps);
    const float* src = window_data(i);
    for (size_t j = 0; j < w.values.size(); ++j) w.values[j] = src[j];
    return w;
}

SensorDataset SensorDataset::subset(const std::vector<size_t>& indices) const {
    SensorDataset out;
    out.channels = channels;
    out.steps = steps;
    out.num_classes = num_classes;
    out.min_label = min_label;
    out.split_tag = split_tag;
    const size_t stride = size_t(channels) * steps;
    out.values.reserve(indices.size() * stride);
    out.labels.reserve(indices.size());
    for (size_t i : indices) {
        const float* src = window_data(i);
        out.values.insert(out.values.end(), src, src + stride);
        out.labels.push_back(labels[i]);
        if (!subjects.empty()) out.subjects.push_back(subjects[i]);
    }
    return out;
}

std::map<int, size_t> class_distribution(const SensorDataset& ds) {
    if (ds.size() == 0) throw data_error("class_distribution: dataset is empty");
    std::map<int, size_t> counts;
    for (size_t i = 0; i < ds.size(); ++i) ++counts[ds.label(i)];
    return counts;
}

std::vector<int> distinct_subjects(const SensorDataset& ds) {
    std::set<int> s(ds.subjects.begin(), ds.subjects.end());
    return {s.begin(), s.end()};
}

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("missing file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
}

// Parses whitespace-separated decimals, one row per line.
std::vector<std::vector<double>> parse_rows(const fs::path& path) {
    const std::string text = read_file(path);
    std::vector<std::vector<double>> rows;
    const char* p = text.c_str();
    const char* end = p + text.size();
    size_t line_no = 0;
    while (p < end) {
        const char* line_end = static_cast<const char*>(memchr(p, '\n', size_t(end - p)));
        if (!line_end) line_end = end;
        ++line_no;
        std::vector<double> row;
        const char* q = p;
        while (q < line_end) {
            while (q < line_end && (*q == ' ' || *q == '\t' || *q == '\r')) ++q;
            if (q >= line_end) break;
            char* after = nullptr;
            const double v = std::strtod(q, &after);
            if (after == q)
                throw data_error(path.filename().string() + " line " + std::to_string(line_no) +
                                 ": unparsable value");
            row.push_back(v);
            q = after;
        }
        if (!row.empty()) rows.push_back(std::move(row));
        p = line_end + 1;
    }
    return rows;
}

struct SourceStamp {
    uint64_t size = 0;
    int64_t mtime_ns = 0;
};

SourceStamp stamp_of(const fs::path& path) {
    SourceStamp s;
    std::error_code ec;
    s.size = uint64_t(fs::file_size(path, ec));
    if (ec) return s;
    const auto t = fs::last_write_time(path, ec);
    if (!ec) s.mtime_ns = int64_t(t.time_since_epoch().count());
    return s;
}

constexpr char kCacheMagic[4] = {'D', 'W', 'N', 'C'};
constexpr uint32_t kCacheVersion = 1;

bool try_load_cache(const fs::path& cache_path, const std::vector<SourceStamp>& stamps,
                    SensorDataset& ds) {
    std::ifstream in(cache_path, std::ios::binary);
    if (!in) return false;
    char magic[4];
    uint32_t version = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    if (!in || memcmp(magic, kCacheMagic, 4) != 0 || version != kCacheVersion) return false;
    uint32_t n_stamps = 0;
    in.read(reinterpret_cast<char*>(&n_stamps), 4);
    if (!in || n_stamps != stamps.size()) return false;
    for (const SourceStamp& want : stamps) {
        SourceStamp got;
        in.read(reinterpret_cast<char*>(&got.size), 8);
        in.read(reinterpret_cast<char*>(&got.mtime_ns), 8);
        if (!in || got.size != want.size || got.mtime_ns != want.mtime_ns) return false;
    }
    uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), 8);
    if (!in) return false;
    ds.values.resize(n * kHarChannels * kHarSteps);
    ds.labels.resize(n);
    ds.subjects.resize(n);
    in.read(reinterpret_cast<char*>(ds.values.data()), std::streamsize(ds.values.size() * 4));
    in.read(reinterpret_cast<char*>(ds.labels.data()), std::streamsize(n * 2));
    in.read(reinterpret_cast<char*>(ds.subjects.data()), std::streamsize(n * 2));
    return bool(in);
}

void try_write_cache(const fs::path& cache_path, const std::vector<SourceStamp>& stamps,
                     const SensorDataset& ds) {
    std::ofstream out(cache_path, std::ios::binary | std::ios::trunc);
    if (!out) return;  // read-only dataset directory: skip caching
    out.write(kCacheMagic, 4);
    out.write(reinterpret_cast<const char*>(&kCacheVersion), 4);
    const uint32_t n_stamps = uint32_t(stamps.size());
    out.write(reinterpret_cast<const char*>(&n_stamps), 4);
    for (const SourceStamp& s : stamps) {
        out.write(reinterpret_cast<const char*>(&s.size), 8);
        out.write(reinterpret_cast<const char*>(&s.mtime_ns), 8);
    }
    const uint64_t n = ds.size();
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(ds.values.data()), std::streamsize(ds.values.size() * 4));
    out.write(reinterpret_cast<const char*>(ds.labels.data()), std::streamsize(n * 2));
    out.write(reinterpret_cast<const char*>(ds.subjects.data()), std::streamsize(n * 2));
}

}  // namespace

SensorDataset load_har_split(const std::string& root, Split split, bool use_cache) {
    const std::string tag = split_name(split);
    const fs::path split_dir = fs::path(root) / tag;
    const fs::path signals_dir = split_dir / "Inertial Signals";

    std::vector<fs::path> sources;
    for (uint32_t c = 0; c < kHarChannels; ++c)
        sources.push_back(signals_dir / (std::string(kHarChannelNames[c]) + "_" + tag + ".txt"));
    const fs::path label_file = split_dir / ("y_" + tag + ".txt");
    const fs::path subject_file = split_dir / ("subject_" + tag + ".txt");
    sources.push_back(label_file);
    sources.push_back(subject_file);

    for (const fs::path& p : sources)
        if (!fs::exists(p)) throw io_error("missing file: " + p.string());

    SensorDataset ds;
    ds.channels = kHarChannels;
    ds.steps = kHarSteps;
    ds.num_classes = kHarClasses;
    ds.min_label = 1;
    ds.split_tag = tag;

    std::vector<SourceStamp> stamps;
    for (const fs::path& p : sources) stamps.push_back(stamp_of(p));
    const fs::path cache_path = split_dir / ".dwn_cache.bin";
    if (use_cache && try_load_cache(cache_path, stamps, ds)) return ds;

    // Labels and subjects first; they fix the expected row count.
    std::vector<std::vector<double>> label_rows = parse_rows(label_file);
    std::vector<std::vector<double>> subject_rows = parse_rows(subject_file);
    const size_t n = label_rows.size();
    if (subject_rows.size() != n)
        throw data_error("row-count mismatch: " + subject_file.filename().string() + " has " +
                         std::to_string(subject_rows.size()) + " rows, labels have " +
                         std::to_string(n));

    ds.labels.resize(n);
    ds.subjects.resize(n);
    for (size_t i = 0; i < n; ++i) {
        if (label_rows[i].size() != 1)
            throw data_error(label_file.filename().string() + " line " + std::to_string(i + 1) +
                             ": expected 1 value, got " + std::to_string(label_rows[i].size()));
        const int v = int(label_rows[i][0]);
        if (v < 1 || v > int(kHarClasses))
            throw data_error(label_file.filename().string() + " line " + std::to_string(i + 1) +
                             ": label " + std::to_string(v) + " out of 1..6");
        ds.labels[i] = int16_t(v);
        ds.subjects[i] = int16_t(subject_rows[i].empty() ? 0 : subject_rows[i][0]);
    }

    ds.values.resize(n * kHarChannels * kHarSteps);
    for (uint32_t c = 0; c < kHarChannels; ++c) {
        std::vector<std::vector<double>> rows = parse_rows(sources[c]);
        if (rows.size() != n)
            throw data_error("row-count mismatch: " + sources[c].filename().string() + " has " +
                             std::to_string(rows.size()) + " rows, labels have " +
                             std::to_string(n));
        for (size_t i = 0; i < n; ++i) {
            if (rows[i].size() != kHarSteps)
                throw data_error(sources[c].filename().string() + " line " +
                                 std::to_string(i + 1) + ": expected " +
                                 std::to_string(kHarSteps) + " values, got " +
                                 std::to_string(rows[i].size()));
            float* dst = ds.values.data() + (i * kHarChannels + c) * kHarSteps;
            for (uint32_t t = 0; t < kHarSteps; ++t) dst[t] = float(rows[i][t]);
        }
    }

    if (use_cache) try_write_cache(cache_path, stamps, ds);
    return ds;
}

}  // namespace dwn
