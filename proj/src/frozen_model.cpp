#include "dwn/frozen_model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "dwn/error.hpp"

namespace dwn {

namespace {

size_t words_for_bits(size_t bits) { return (bits + 63) / 64; }

void set_bit(std::vector<uint64_t>& words, size_t b) { words[b >> 6] |= uint64_t(1) << (b & 63); }

}  // namespace

FrozenModel freeze(const DwnModel& model) {
    model.validate();
    const Routing routing = compute_routing(model);

    FrozenModel out;
    out.encoder = model.encoder;
    out.encoder_steps = model.encoder_steps;
    out.num_classes = model.num_classes;
    out.tau = model.tau;

    for (size_t li = 0; li < model.layers.size(); ++li) {
        const LutLayer& layer = model.layers[li];
        FrozenLayer fl;
        fl.num_luts = layer.num_luts;
        fl.arity = layer.arity;
        fl.input_width = layer.input_width;
        fl.routing = routing.source[li];
        fl.lut_bits.assign(words_for_bits(size_t(layer.num_luts) * layer.entries_per_lut()), 0);
        for (uint32_t lut = 0; lut < layer.num_luts; ++lut)
            for (uint32_t u = 0; u < layer.entries_per_lut(); ++u)
                if (layer.entry_weights[layer.entry_index(lut, u)] > 0.0)
                    set_bit(fl.lut_bits, size_t(lut) * layer.entries_per_lut() + u);
        out.layers.push_back(std::move(fl));
    }
    return out;
}

namespace {

Prediction run_packed(const FrozenModel& m, PredictScratch& s) {
    // s.cur holds the packed input bits of layer 0.
    const uint32_t K = m.num_classes;
    const uint32_t G = m.group_size();
    s.counts.assign(K, 0);

    for (size_t li = 0; li < m.layers.size(); ++li) {
        const FrozenLayer& layer = m.layers[li];
        const bool last = li + 1 == m.layers.size();
        if (!last) {
            s.next.assign(words_for_bits(layer.num_luts), 0);
        }
        const uint32_t* route = layer.routing.data();
        for (uint32_t lut = 0; lut < layer.num_luts; ++lut) {
            uint32_t addr = 0;
            const uint32_t* r = route + size_t(lut) * layer.arity;
            for (uint32_t pin = 0; pin < layer.arity; ++pin) {
                const uint32_t src = r[pin];
                addr |= uint32_t((s.cur[src >> 6] >> (src & 63)) & 1u) << pin;
            }
            const size_t b = size_t(lut) * layer.entries_per_lut() + addr;
            const uint32_t bit = uint32_t((layer.lut_bits[b >> 6] >> (b & 63)) & 1u);
            if (last)
                s.counts[lut / G] += bit;
            else if (bit)
                s.next[lut >> 6] |= uint64_t(1) << (lut & 63);
        }
        if (!last) std::swap(s.cur, s.next);
    }

    Prediction p;
    p.scores.resize(K);
    uint32_t best = 0;
    for (uint32_t c = 0; c < K; ++c) {
        p.scores[c] = m.tau * double(s.counts[c]) / double(G);
        if (s.counts[c] > s.counts[best]) best = c;  // ties -> lowest index
    }
    p.label = best;
    return p;
}

void pack_window(const FrozenModel& m, const Window& window, std::vector<uint64_t>& words) {
    const ThermometerEncoder& enc = m.encoder;
    const uint32_t B = enc.bits_per_value();
    const uint32_t T = window.steps;
    words.assign(words_for_bits(size_t(enc.encoded_width(T))), 0);
    for (uint32_t c = 0; c < enc.num_channels(); ++c) {
        const std::span<const double> thr = enc.channel_thresholds(c);
        for (uint32_t t = 0; t < T; ++t) {
            const double v = window.at(c, t);
            const uint32_t ones =
                uint32_t(std::lower_bound(thr.begin(), thr.end(), v) - thr.begin());
            const size_t base = (size_t(c) * T + t) * B;
            for (uint32_t k = 0; k < ones; ++k) set_bit(words, base + k);
        }
    }
}

}  // namespace

Prediction predict(const FrozenModel& m, const Window& window, PredictScratch* scratch) {
    if (window.channels != m.encoder.num_channels() || window.steps != m.encoder_steps)
        throw shape_error("predict: window shape mismatch");
    PredictScratch local;
    PredictScratch& s = scratch ? *scratch : local;
    pack_window(m, window, s.cur);
    return run_packed(m, s);
}

Prediction predict_bits(const FrozenModel& m, std::span<const uint8_t> bits,
                        PredictScratch* scratch) {
    if (bits.size() != m.input_width())
        throw shape_error("predict_bits: expected " + std::to_string(m.input_width()) +
                          " bits, got " + std::to_string(bits.size()));
    PredictScratch local;
    PredictScratch& s = scratch ? *scratch : local;
    s.cur.assign(words_for_bits(bits.size()), 0);
    for (size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) set_bit(s.cur, i);
    return run_packed(m, s);
}

uint64_t model_size_bytes(const FrozenModel& m) {
    uint64_t bits = 0;
    for (const FrozenLayer& l : m.layers)
        bits += uint64_t(l.num_luts) << l.arity;
    return (bits + 7) / 8;
}

namespace {

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw io_error("cannot open for writing: " + path);
    }
    void u32(uint32_t v) {
        uint8_t b[4] = {uint8_t(v), uint8_t(v >> 8), uint8_t(v >> 16), uint8_t(v >> 24)};
        out_.write(reinterpret_cast<char*>(b), 4);
    }
    void f64(double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, 8);
        uint8_t b[8];
        for (int i = 0; i < 8; ++i) b[i] = uint8_t(bits >> (8 * i));
        out_.write(reinterpret_cast<char*>(b), 8);
    }
    void bytes(const uint8_t* data, size_t n) {
        out_.write(reinterpret_cast<const char*>(data), std::streamsize(n));
    }
    void close(const std::string& path) {
        out_.flush();
        if (!out_) throw io_error("write failed: " + path);
    }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw io_error("cannot open: " + path);
    }
    uint32_t u32() {
        uint8_t b[4];
        read(b, 4);
        return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
    }
    double f64() {
        uint8_t b[8];
        read(b, 8);
        uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= uint64_t(b[i]) << (8 * i);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    void read(uint8_t* dst, size_t n) {
        in_.read(reinterpret_cast<char*>(dst), std::streamsize(n));
        if (size_t(in_.gcount()) != n)
            throw format_error("truncated model file " + path_ + " at offset " +
                               std::to_string(offset_));
        offset_ += n;
    }
    size_t offset() const { return offset_; }

private:
    std::string path_;
    std::ifstream in_;
    size_t offset_ = 0;
};

constexpr char kModelMagic[4] = {'D', 'W', 'N', 'M'};
constexpr uint32_t kModelVersion = 1;

}  // namespace

void save_model(const FrozenModel& m, const std::string& path) {
    Writer w(path);
    w.bytes(reinterpret_cast<const uint8_t*>(kModelMagic), 4);
    w.u32(kModelVersion);
    w.u32(uint32_t(m.layers.size()));
    for (const FrozenLayer& l : m.layers) {
        w.u32(l.num_luts);
        w.u32(l.arity);
    }
    w.u32(m.num_classes);
    w.f64(m.tau);
    w.u32(m.encoder.num_channels());
    w.u32(m.encoder_steps);
    w.u32(m.encoder.bits_per_value());
    for (double t : m.encoder.raw_thresholds()) w.f64(t);
    for (const FrozenLayer& l : m.layers)
        for (uint32_t r : l.routing) w.u32(r);
    for (const FrozenLayer& l : m.layers) {
        const size_t n_bits = size_t(l.num_luts) << l.arity;
        for (size_t j = 0; j < (n_bits + 7) / 8; ++j) {
            const uint8_t byte = uint8_t(l.lut_bits[j >> 3] >> ((j & 7) * 8));
            w.bytes(&byte, 1);
        }
    }
    w.close(path);
}

FrozenModel load_model(const std::string& path) {
    Reader r(path);
    uint8_t magic[4];
    r.read(magic, 4);
    if (std::memcmp(magic, kModelMagic, 4) != 0)
        throw format_error("bad magic in " + path + " at offset 0: not a model file");
    const uint32_t version = r.u32();
    if (version != kModelVersion)
        throw format_error("unsupported model version " + std::to_string(version) + " in " +
                           path + " at offset 4 (expected " + std::to_string(kModelVersion) +
                           ")");

    const uint32_t n_layers = r.u32();
    if (n_layers == 0 || n_layers > 64)
        throw format_error("implausible layer count " + std::to_string(n_layers) + " in " + path);

    FrozenModel m;
    std::vector<std::pair<uint32_t, uint32_t>> shapes(n_layers);
    for (auto& [luts, arity] : shapes) {
        luts = r.u32();
        arity = r.u32();
        if (arity < 1 || arity > 8 || luts == 0)
            throw format_error("implausible layer shape in " + path + " at offset " +
                               std::to_string(r.offset() - 8));
    }
    m.num_classes = r.u32();
    m.tau = r.f64();
    const uint32_t enc_channels = r.u32();
    m.encoder_steps = r.u32();
    const uint32_t enc_bits = r.u32();
    if (enc_channels == 0 || enc_bits == 0 || m.num_classes == 0 || enc_channels > (1u << 20) ||
        enc_bits > (1u << 20) || m.encoder_steps > (1u << 20) || m.num_classes > (1u << 20))
        throw format_error("implausible header field in " + path + " at offset " +
                           std::to_string(r.offset()));

    // The header fixes every section size; reject files that do not carry
    // exactly that many bytes before allocating anything from those counts.
    uint64_t expected = uint64_t(r.offset());
    expected += uint64_t(enc_channels) * enc_bits * 8;
    for (const auto& [luts, arity] : shapes) {
        expected += uint64_t(luts) * arity * 4;
        expected += ((uint64_t(luts) << arity) + 7) / 8;
    }
    std::error_code ec;
    const uint64_t actual = uint64_t(std::filesystem::file_size(path, ec));
    if (ec || actual != expected)
        throw format_error("truncated or padded model file " + path + ": header at offset " +
                           std::to_string(r.offset()) + " implies " + std::to_string(expected) +
                           " bytes, file has " + std::to_string(actual));

    std::vector<double> thresholds(size_t(enc_channels) * enc_bits);
    for (double& t : thresholds) t = r.f64();
    m.encoder = ThermometerEncoder(enc_channels, enc_bits, std::move(thresholds));

    uint32_t width = m.encoder.encoded_width(m.encoder_steps);
    for (auto& [luts, arity] : shapes) {
        FrozenLayer l;
        l.num_luts = luts;
        l.arity = arity;
        l.input_width = width;
        l.routing.resize(size_t(luts) * arity);
        m.layers.push_back(std::move(l));
        width = luts;
    }
    for (FrozenLayer& l : m.layers) {
        for (uint32_t& idx : l.routing) {
            idx = r.u32();
            if (idx >= l.input_width)
                throw format_error("routing index out of range in " + path + " at offset " +
                                   std::to_string(r.offset() - 4));
        }
    }
    for (FrozenLayer& l : m.layers) {
        const size_t n_bits = size_t(l.num_luts) << l.arity;
        l.lut_bits.assign(words_for_bits(n_bits), 0);
        for (size_t j = 0; j < (n_bits + 7) / 8; ++j) {
            uint8_t byte;
            r.read(&byte, 1);
            l.lut_bits[j >> 3] |= uint64_t(byte) << ((j & 7) * 8);
        }
    }
    if (m.output_luts() % m.num_classes != 0)
        throw format_error("final layer not divisible by class count in " + path);
    return m;
}

BenchReport bench(const FrozenModel& m, const SensorDataset& ds, uint32_t repetitions) {
    if (ds.size() == 0) throw data_error("bench: dataset is empty");
    if (repetitions == 0) throw config_error("bench: repetitions must be positive");

    PredictScratch scratch;
    volatile uint32_t sink = 0;  // keep the passes from being optimized out

    auto one_pass = [&] {
        uint32_t acc = 0;
        for (size_t i = 0; i < ds.size(); ++i)
            acc += predict(m, ds.window(i), &scratch).label;
        sink = acc;
    };

    one_pass();  // warmup, untimed

    BenchReport report;
    report.repetitions = repetitions;
    std::vector<double> pass_seconds(repetitions);
    for (uint32_t rep = 0; rep < repetitions; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        one_pass();
        pass_seconds[rep] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    report.total_inferences = uint64_t(repetitions) * ds.size();
    const double total = std::accumulate(pass_seconds.begin(), pass_seconds.end(), 0.0);
    report.samples_per_second = double(report.total_inferences) / total;
    const double n = double(ds.size());
    report.mean_us = total / double(repetitions) / n * 1e6;
    report.min_us = *std::min_element(pass_seconds.begin(), pass_seconds.end()) / n * 1e6;
    report.max_us = *std::max_element(pass_seconds.begin(), pass_seconds.end()) / n * 1e6;
    return report;
}

Metrics evaluate_frozen(const FrozenModel& m, const SensorDataset& ds) {
    if (ds.size() == 0) throw data_error("evaluate: dataset is empty");
    if (ds.num_classes != m.num_classes)
        throw shape_error("evaluate: dataset class count mismatch");
    PredictScratch scratch;
    std::vector<uint32_t> truth(ds.size()), pred(ds.size());
    for (size_t i = 0; i < ds.size(); ++i) {
        truth[i] = ds.class_index(i);
        pred[i] = predict(m, ds.window(i), &scratch).label;
    }
    return compute_metrics(truth, pred, m.num_classes);
}

}  // namespace dwn
