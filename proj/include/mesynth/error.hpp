#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mesynth {

// Contract violations in inputs: malformed files, invalid configs, bad
// requests. The CLI maps these to exit code 1. The `code` field carries a
// stable machine-readable name (e.g. "MissingColumn", "UnknownLabel") so
// callers can dispatch without string-matching the message.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Filesystem / stream failures. The CLI maps these to exit code 2.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

[[noreturn]] inline void fail(std::string code, const std::string& message) {
    throw ValidationError(std::move(code), message);
}

}  // namespace mesynth
