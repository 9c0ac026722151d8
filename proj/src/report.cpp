#include "dwn/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dwn/error.hpp"

namespace dwn {

std::vector<ComparisonRow> builtin_baselines() {
    // Values as reported by the respective publications (accuracy/F1 on the
    // UCI-HAR test split, parameter size, FLOPs per inference).
    return {
        {"TSLANet", 0.9606, -1.0, -1.0, 69000000, false},
        {"Channel-Equalization-HAR", 0.9735, 0.9712, 1600.0, 44000000, false},
        {"CNN", 0.9627, 0.9627, 5100.0, 35000000, false},
        {"HARMamba", 0.9765, 0.9701, 1300.0, 11000000, false},
    };
}

std::vector<ComparisonRow> parse_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open manifest: " + path);
    std::vector<ComparisonRow> rows;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string name, acc, f1, size_kib, flops;
        if (!(ls >> name)) continue;
        if (!(ls >> acc >> f1 >> size_kib >> flops))
            throw data_error(path + " line " + std::to_string(line_no) +
                             ": expected 'name accuracy f1 size_kib flops'");
        ComparisonRow row;
        row.name = name;
        row.accuracy = acc == "-" ? -1.0 : std::stod(acc) / 100.0;
        row.f1 = f1 == "-" ? -1.0 : std::stod(f1) / 100.0;
        row.size_kib = size_kib == "-" ? -1.0 : std::stod(size_kib);
        row.flops = flops == "-" ? 0 : std::stoull(flops);
        rows.push_back(row);
    }
    return rows;
}

ComparisonRow row_from_model(const std::string& name, const FrozenModel& model, double accuracy,
                             double f1) {
    ComparisonRow row;
    row.name = name;
    row.accuracy = accuracy;
    row.f1 = f1;
    row.size_kib = double(model_size_bytes(model)) / 1024.0;
    row.flops = 0;
    row.local = true;
    return row;
}

namespace {

std::string pct_or_dash(double v) {
    if (v < 0) return "-";
    char buf[32];
    snprintf(buf, sizeof(buf), "%.2f%%", v * 100.0);
    return buf;
}

std::string kib_or_dash(double v) {
    if (v < 0) return "-";
    char buf[32];
    snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

}  // namespace

std::string render_comparison(const std::vector<ComparisonRow>& rows, const EnergyModel& energy) {
    std::string out;
    char buf[256];
    snprintf(buf, sizeof(buf), "%-26s %-9s %-9s %-10s %-12s %-14s\n", "model", "accuracy",
             "f1", "size_kib", "flops", "energy_mj");
    out += buf;
    for (const ComparisonRow& r : rows) {
        const double mj = estimate_energy_mj(r.flops, energy);
        char mj_buf[32];
        if (r.flops == 0)
            snprintf(mj_buf, sizeof(mj_buf), "0");
        else
            snprintf(mj_buf, sizeof(mj_buf), "%.1f", mj);
        char flops_buf[32];
        if (r.flops == 0)
            snprintf(flops_buf, sizeof(flops_buf), "0");
        else
            snprintf(flops_buf, sizeof(flops_buf), "%lluM", (unsigned long long)(r.flops / 1000000));
        snprintf(buf, sizeof(buf), "%-26s %-9s %-9s %-10s %-12s %-14s\n", r.name.c_str(),
                 pct_or_dash(r.accuracy).c_str(), pct_or_dash(r.f1).c_str(),
                 kib_or_dash(r.size_kib).c_str(), flops_buf, mj_buf);
        out += buf;
    }
    out += "\nnote: external FLOP counts are taken from the source publications; whether\n";
    out += "they cover preprocessing as well as the model itself is not stated there.\n";
    out += "If preprocessing is excluded, the comparison flatters those models.\n";
    return out;
}

std::string render_model_summary(
    const std::vector<std::pair<std::string, const FrozenModel*>>& models) {
    std::string out;
    char buf[256];
    snprintf(buf, sizeof(buf), "%-24s %-10s %-8s %-8s %-12s %-10s %-8s\n", "model", "layers",
             "luts", "arity", "size_bytes", "size_kib", "classes");
    out += buf;
    for (const auto& [name, m] : models) {
        std::string luts, arity;
        for (const FrozenLayer& l : m->layers) {
            luts += (luts.empty() ? "" : ",") + std::to_string(l.num_luts);
            arity += (arity.empty() ? "" : ",") + std::to_string(l.arity);
        }
        const uint64_t bytes = model_size_bytes(*m);
        snprintf(buf, sizeof(buf), "%-24s %-10zu %-8s %-8s %-12llu %-10.2f %-8u\n", name.c_str(),
                 m->layers.size(), luts.c_str(), arity.c_str(), (unsigned long long)bytes,
                 double(bytes) / 1024.0, m->num_classes);
        out += buf;
    }
    return out;
}

}  // namespace dwn
