#pragma once

#include <stdexcept>
#include <string>

namespace jamnull {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite values or otherwise unusable numeric input.
class NumericInputError : public Error {
public:
    using Error::Error;
};

/// Dimension mismatch or structurally wrong matrix (e.g. not Hermitian).
class ShapeError : public Error {
public:
    using Error::Error;
};

class NotPsdError : public Error {
public:
    using Error::Error;
};

/// Raised when a correlation schedule produces an invalid covariance.
class ScheduleError : public Error {
public:
    using Error::Error;
};

class IllConditionedError : public Error {
public:
    using Error::Error;
};

/// Out-of-range arguments and empty inputs.
class InputError : public Error {
public:
    using Error::Error;
};

/// Invalid experiment configuration; the message carries the key path.
class ConfigError : public Error {
public:
    using Error::Error;
};

class CheckpointError : public Error {
public:
    using Error::Error;
};

} // namespace jamnull
