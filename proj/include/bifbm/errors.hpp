#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bifbm {

// Argument outside an operation's domain (negative time, empty interval,
// off-grid evaluation time, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Covariance matrix could not be factorized even after jitter escalation.
class FactorizationError : public std::runtime_error {
public:
    FactorizationError(const std::string& what, std::size_t pivot)
        : std::runtime_error(what), pivot_(pivot) {}

    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

// Experiment configuration rejected at parse/validation time. `key` names the
// offending field, `line` is 1-based (0 when the problem is not tied to a line).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, std::size_t line, const std::string& message)
        : std::runtime_error(format(key, line, message)), key_(std::move(key)), line_(line) {}

    const std::string& key() const noexcept { return key_; }
    std::size_t line() const noexcept { return line_; }

private:
    static std::string format(const std::string& key, std::size_t line, const std::string& message) {
        std::string out = "config error";
        if (line > 0) out += " at line " + std::to_string(line);
        if (!key.empty()) out += " [" + key + "]";
        return out + ": " + message;
    }

    std::string key_;
    std::size_t line_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace bifbm
