#include "dwn/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dwn/error.hpp"
#include "dwn/rng.hpp"

namespace dwn {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text, const std::string& origin) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error((origin.empty() ? "config" : origin) + " line " +
                               std::to_string(line_no) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw config_error((origin.empty() ? "config" : origin) + " line " +
                               std::to_string(line_no) + ": empty key");
        cfg.values_[key] = value;
    }
    return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    values_[key] = value;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    read_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

int64_t KeyValueConfig::get_int(const std::string& key, int64_t fallback) const {
    read_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    char* end = nullptr;
    const int64_t v = std::strtoll(it->second.c_str(), &end, 10);
    if (end == it->second.c_str() || *end != '\0')
        throw config_error("key '" + key + "': '" + it->second + "' is not an integer");
    return v;
}

uint64_t KeyValueConfig::get_uint(const std::string& key, uint64_t fallback) const {
    read_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    char* end = nullptr;
    const uint64_t v = std::strtoull(it->second.c_str(), &end, 10);
    if (end == it->second.c_str() || *end != '\0')
        throw config_error("key '" + key + "': '" + it->second + "' is not an unsigned integer");
    return v;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    read_.insert(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0')
        throw config_error("key '" + key + "': '" + it->second + "' is not a number");
    return v;
}

std::set<std::string> KeyValueConfig::unread_keys() const {
    std::set<std::string> out;
    for (const auto& [k, v] : values_)
        if (!read_.count(k)) out.insert(k);
    return out;
}

TrainConfig train_config_from(const KeyValueConfig& cfg) {
    TrainConfig tc;
    tc.batch_size = uint32_t(cfg.get_uint("batch_size", tc.batch_size));
    tc.lr = cfg.get_double("lr", tc.lr);
    tc.lr_decay = cfg.get_double("lr_decay", tc.lr_decay);
    tc.lr_decay_epochs = uint32_t(cfg.get_uint("lr_decay_epochs", tc.lr_decay_epochs));
    tc.epochs = uint32_t(cfg.get_uint("epochs", tc.epochs));
    tc.adam.beta1 = cfg.get_double("beta1", tc.adam.beta1);
    tc.adam.beta2 = cfg.get_double("beta2", tc.adam.beta2);
    tc.adam.epsilon = cfg.get_double("epsilon", tc.adam.epsilon);
    tc.seed = cfg.get_uint("seed", tc.seed);
    tc.threads = uint32_t(cfg.get_uint("threads", tc.threads));
    tc.thermometer_bits = uint32_t(cfg.get_uint("thermometer_bits", tc.thermometer_bits));

    tc.augment.probability = cfg.get_double("augment_p", tc.augment.probability);
    tc.augment.max_shift = int(cfg.get_int("max_shift", tc.augment.max_shift));
    tc.augment.scale_min = cfg.get_double("scale_min", tc.augment.scale_min);
    tc.augment.scale_max = cfg.get_double("scale_max", tc.augment.scale_max);
    tc.augment.jitter_sigma = cfg.get_double("jitter_sigma", tc.augment.jitter_sigma);
    tc.augment.max_mask_len = int(cfg.get_int("max_mask_len", tc.augment.max_mask_len));
    tc.augment.max_rotation_deg = cfg.get_double("max_rotation_deg", tc.augment.max_rotation_deg);
    tc.augment.lowpass_cutoff_hz = cfg.get_double("lowpass_cutoff_hz", tc.augment.lowpass_cutoff_hz);
    tc.augment.sample_rate_hz = cfg.get_double("sample_rate_hz", tc.augment.sample_rate_hz);
    // Augmentation noise follows the master seed unless pinned explicitly.
    tc.augment.seed = cfg.get_uint("augment_seed", mix_seed(tc.seed, 7));

    // Default sized for the 6-class task: groups must divide evenly.
    const std::string luts = cfg.get_string("luts", "1998");
    tc.model.layer_luts.clear();
    std::istringstream ls(luts);
    std::string item;
    while (std::getline(ls, item, ',')) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(item.c_str(), &end, 10);
        if (end == item.c_str() || *end != '\0' || v == 0)
            throw config_error("key 'luts': '" + item + "' is not a positive integer");
        tc.model.layer_luts.push_back(uint32_t(v));
    }
    tc.model.arity = uint32_t(cfg.get_uint("arity", tc.model.arity));
    tc.model.pool_size = uint32_t(cfg.get_uint("pool_size", tc.model.pool_size));
    tc.model.tau = cfg.get_double("tau", tc.model.tau);
    tc.model.num_classes = uint32_t(cfg.get_uint("num_classes", tc.model.num_classes));

    tc.efd.radius = int(cfg.get_int("efd_radius", tc.efd.radius));
    tc.efd.lambda = cfg.get_double("efd_lambda", tc.efd.lambda);

    const std::set<std::string> unread = cfg.unread_keys();
    if (!unread.empty()) {
        std::string keys;
        for (const std::string& k : unread) keys += (keys.empty() ? "" : ", ") + k;
        throw config_error("unknown config keys: " + keys);
    }
    return tc;
}

std::string dump_train_config(const TrainConfig& tc) {
    std::ostringstream out;
    out.precision(17);
    out << "batch_size=" << tc.batch_size << "\n";
    out << "lr=" << tc.lr << "\n";
    out << "lr_decay=" << tc.lr_decay << "\n";
    out << "lr_decay_epochs=" << tc.lr_decay_epochs << "\n";
    out << "epochs=" << tc.epochs << "\n";
    out << "beta1=" << tc.adam.beta1 << "\n";
    out << "beta2=" << tc.adam.beta2 << "\n";
    out << "epsilon=" << tc.adam.epsilon << "\n";
    out << "seed=" << tc.seed << "\n";
    out << "threads=" << tc.threads << "\n";
    out << "thermometer_bits=" << tc.thermometer_bits << "\n";
    out << "augment_p=" << tc.augment.probability << "\n";
    out << "augment_seed=" << tc.augment.seed << "\n";
    out << "max_shift=" << tc.augment.max_shift << "\n";
    out << "scale_min=" << tc.augment.scale_min << "\n";
    out << "scale_max=" << tc.augment.scale_max << "\n";
    out << "jitter_sigma=" << tc.augment.jitter_sigma << "\n";
    out << "max_mask_len=" << tc.augment.max_mask_len << "\n";
    out << "max_rotation_deg=" << tc.augment.max_rotation_deg << "\n";
    out << "lowpass_cutoff_hz=" << tc.augment.lowpass_cutoff_hz << "\n";
    out << "sample_rate_hz=" << tc.augment.sample_rate_hz << "\n";
    std::string luts;
    for (uint32_t v : tc.model.layer_luts) luts += (luts.empty() ? "" : ",") + std::to_string(v);
    out << "luts=" << luts << "\n";
    out << "arity=" << tc.model.arity << "\n";
    out << "pool_size=" << tc.model.pool_size << "\n";
    out << "tau=" << tc.model.tau << "\n";
    out << "num_classes=" << tc.model.num_classes << "\n";
    out << "efd_radius=" << tc.efd.radius << "\n";
    out << "efd_lambda=" << tc.efd.lambda << "\n";
    return out.str();
}

}  // namespace dwn
