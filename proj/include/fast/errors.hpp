#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fast {

/// Invalid argument values: unsupported scale factors, mismatched plane sizes, bad configs.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A block or region reaches outside its plane.
class BoundsError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Malformed sidecar / image data. Carries the byte offset where decoding stopped.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// External SR process failed or violated the plugin protocol.
class PluginError : public std::runtime_error {
public:
    PluginError(const std::string& what, std::string diagnostics = {})
        : std::runtime_error(diagnostics.empty() ? what : what + ": " + diagnostics),
          diagnostics_(std::move(diagnostics)) {}

    const std::string& diagnostics() const noexcept { return diagnostics_; }

private:
    std::string diagnostics_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fast
