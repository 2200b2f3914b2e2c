#pragma once

#include <stdexcept>
#include <string>

namespace nsnn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Arguments violate an operation's precondition.
class InvalidInput : public Error
{
public:
    using Error::Error;
};

/// Square system with zero determinant.
class SingularSystem : public Error
{
public:
    using Error::Error;
};

/// A single-synapse neuron with a non-positive weight never fires.
class NonExcitatory : public Error
{
public:
    using Error::Error;
};

/// A statistic or metric that is undefined for the given data.
class UndefinedMetric : public Error
{
public:
    using Error::Error;
};

/// Malformed network, table, or config file. `where` names the line or field.
class ParseError : public Error
{
public:
    ParseError(const std::string& where, const std::string& what)
        : Error(where.empty() ? what : where + ": " + what), where_(where)
    {
    }

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

/// A structurally inconsistent network graph.
class ValidationError : public Error
{
public:
    using Error::Error;
};

} // namespace nsnn
