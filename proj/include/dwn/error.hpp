#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace dwn {

// Error with a short machine-parsable category. The CLI prints failures as
// "error: <category>: <message>" and exits nonzero.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

inline Error data_error(const std::string& msg) { return Error("data", msg); }
inline Error format_error(const std::string& msg) { return Error("format", msg); }
inline Error config_error(const std::string& msg) { return Error("config", msg); }
inline Error io_error(const std::string& msg) { return Error("io", msg); }
inline Error shape_error(const std::string& msg) { return Error("shape", msg); }

}  // namespace dwn
