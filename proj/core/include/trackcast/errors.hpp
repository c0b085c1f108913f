#pragma once

#include <stdexcept>
#include <string>

namespace trackcast {

// All library failures derive from Error so callers (the CLI in particular)
// can map families of failures onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shapes of tensors, kernels or datasets do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A configuration value is invalid (even kernel width, bad ratio, ...).
class ConfigurationError : public Error {
public:
    using Error::Error;
};

// An API was called in a way its contract forbids.
class UsageError : public Error {
public:
    using Error::Error;
};

// NaN/Inf showed up where finite values are required.
class NumericError : public Error {
public:
    using Error::Error;
};

class EncodingError : public Error {
public:
    using Error::Error;
};

// An exogenous bundle or dataset violates a documented invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class SizeError : public Error {
public:
    using Error::Error;
};

class DegenerateFitError : public Error {
public:
    using Error::Error;
};

class LoadError : public Error {
public:
    using Error::Error;
};

// Training produced a non-finite loss.
class TrainingError : public NumericError {
public:
    TrainingError(const std::string& what, std::size_t epoch)
        : NumericError(what), epoch_(epoch) {}
    std::size_t epoch() const { return epoch_; }

private:
    std::size_t epoch_;
};

} // namespace trackcast
