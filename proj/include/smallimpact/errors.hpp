#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace smallimpact {

/// Raised when a solver or integrator produces values outside the envelope
/// the model guarantees. Maps to CLI exit code 2.
class NumericFault : public std::runtime_error {
public:
    explicit NumericFault(const std::string& what, std::optional<double> time = std::nullopt)
        : std::runtime_error(what), time_(time) {}

    /// First offending time, when the fault is localized on a time grid.
    [[nodiscard]] std::optional<double> time() const { return time_; }

private:
    std::optional<double> time_;
};

/// Invalid user configuration (parameters, factor family, file contents).
/// Maps to CLI exit code 3.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace smallimpact
