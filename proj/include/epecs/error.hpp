#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace epecs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. Line numbers are 1-based; 0 means "whole file".
class ParseError : public Error
{
public:
    ParseError(std::size_t line, const std::string& message)
        : Error(line == 0 ? message
                          : "line " + std::to_string(line) + ": " + message),
          line_(line)
    {
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A name that does not resolve to a declared entity.
class ReferenceError : public Error
{
public:
    ReferenceError(std::string name, const std::string& context)
        : Error("unknown reference \"" + name + "\" in " + context),
          name_(std::move(name))
    {
    }

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// Structurally invalid optimization program (dimension mismatch etc).
class ModelError : public Error
{
public:
    using Error::Error;
};

/// A scheduling program without a feasible point.
class InfeasibleError : public Error
{
public:
    InfeasibleError(std::string family, const std::string& message)
        : Error(message + " (first violated family: " + family + ")"),
          family_(std::move(family))
    {
    }

    const std::string& family() const noexcept { return family_; }

private:
    std::string family_;
};

/// Unrecoverable numerical or orchestration failure.
class SolverFault : public Error
{
public:
    using Error::Error;
};

} // namespace epecs
