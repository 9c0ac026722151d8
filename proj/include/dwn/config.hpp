#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "dwn/trainer.hpp"

namespace dwn {

// Flat key=value text config. '#' starts a comment; blank lines are ignored.
// Keys read through the typed getters are tracked so unknown leftovers can be
// rejected after a consumer is built.
class KeyValueConfig {
public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_string(const std::string& text, const std::string& origin = "");

    void set(const std::string& key, const std::string& value);
    bool contains(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    int64_t get_int(const std::string& key, int64_t fallback) const;
    uint64_t get_uint(const std::string& key, uint64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;

    // Keys present but never read; non-empty means a probable typo.
    std::set<std::string> unread_keys() const;

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> read_;
};

// Builds a TrainConfig from config keys; rejects unknown keys.
TrainConfig train_config_from(const KeyValueConfig& cfg);

// Serializes every effective setting back to key=value text.
std::string dump_train_config(const TrainConfig& cfg);

}  // namespace dwn
