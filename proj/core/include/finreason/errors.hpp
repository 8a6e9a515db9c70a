#pragma once

#include <stdexcept>
#include <string>

namespace finreason {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input records: bad JSON lines, missing fields, broken invariants.
class DataError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration values or unresolvable paths.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace finreason
