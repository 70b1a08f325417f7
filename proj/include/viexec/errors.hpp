#pragma once

#include <stdexcept>
#include <string>

namespace viexec {

// Raised for malformed experiment configs (unknown keys, bad version, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an environment generator cannot satisfy its constraints.
struct GenerationError : std::runtime_error {
    explicit GenerationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when training produces a non-finite loss.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a checkpoint is incompatible with the requested configuration.
struct CheckpointMismatch : std::runtime_error {
    explicit CheckpointMismatch(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace viexec
