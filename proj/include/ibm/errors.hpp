#pragma once

#include <stdexcept>
#include <string>

namespace ibm {

/// Invalid argument values (preconditions on operation inputs).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Parameters sit on a phase boundary where the requested quantity degenerates.
class BoundaryError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Request exceeds the supported problem scale.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration (CLI-facing).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace ibm
