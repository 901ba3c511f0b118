#pragma once

#include <stdexcept>
#include <string>

namespace mkc {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A parameter is outside its mathematical domain (e.g. sigma <= 0).
class InvalidParamError : public Error {
public:
    using Error::Error;
};

/// An operation that needs at least one sample received none.
class EmptyInputError : public Error {
public:
    using Error::Error;
};

/// Vector/matrix dimensions do not agree.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A linear system could not be solved reliably.
class SingularSystemError : public Error {
public:
    using Error::Error;
};

/// An iterative procedure produced non-finite values.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// Input data cannot support the requested operation (e.g. fewer
/// distinct values than clusters).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// A configuration file or option set is invalid.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Filesystem-level failure, message includes the offending path.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace mkc
