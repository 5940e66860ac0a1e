#pragma once

#include <stdexcept>
#include <string>

namespace dqd {

// Base class for everything the library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parameter validation (rejected model inputs). CLI maps these to exit code 2.
struct ValidationError : Error {
    using Error::Error;
};
struct NonPositiveSpectralDensity : ValidationError {
    using ValidationError::ValidationError;
};
struct NegativeExcessDecoherence : ValidationError {
    using ValidationError::ValidationError;
};
struct NonFiniteParameter : ValidationError {
    using ValidationError::ValidationError;
};

// Numerical failures during integration or analysis. CLI exit code 3.
struct NumericalError : Error {
    using Error::Error;
};
struct NonPositiveWindow : NumericalError {
    using NumericalError::NumericalError;
};
struct TimestepTooLarge : NumericalError {
    using NumericalError::NumericalError;
};
struct NumericalBlowup : NumericalError {
    using NumericalError::NumericalError;
};
struct WindowTooShort : NumericalError {
    using NumericalError::NumericalError;
};
struct NonPositiveValue : NumericalError {
    using NumericalError::NumericalError;
};
struct DegenerateFit : NumericalError {
    using NumericalError::NumericalError;
};
struct SeriesTooShort : NumericalError {
    using NumericalError::NumericalError;
};

// Protocol preconditions that the requested state does not satisfy. Exit code 4.
struct ProtocolError : Error {
    using Error::Error;
};
struct NotPure : ProtocolError {
    using ProtocolError::ProtocolError;
};
struct NoCoherence : ProtocolError {
    using ProtocolError::ProtocolError;
};
struct ArcsinDomain : ProtocolError {
    using ProtocolError::ProtocolError;
};

// Configuration file / CLI problems. Exit code 2.
struct ConfigError : Error {
    using Error::Error;
};
struct MissingField : ConfigError {
    explicit MissingField(const std::string& field)
        : ConfigError("missing required field: " + field), field_name(field) {}
    std::string field_name;
};
struct ParseError : ConfigError {
    using ConfigError::ConfigError;
};

}  // namespace dqd
