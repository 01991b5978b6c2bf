#pragma once

#include <stdexcept>
#include <string>

namespace dpgm {

/// Raised when a graph family or parameter set cannot produce a connected topology.
class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for invalid problem or experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an iterate becomes non-finite.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a ground-truth solve does not reach its tolerance.
class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dpgm
