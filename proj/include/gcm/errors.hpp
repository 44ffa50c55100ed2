#pragma once

#include <stdexcept>
#include <string>

namespace gcm {

// Shape or dimension mismatch between tensors, kernels and configs.
struct ShapeError : std::invalid_argument {
    explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Out-of-domain argument: pixels outside [0,1], non-positive gamma,
// inconsistent config values, undefined gradients.
struct ValueError : std::invalid_argument {
    explicit ValueError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Malformed external input: PPM payloads, label lines, weight containers.
// Messages carry a byte offset or line number.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace gcm
