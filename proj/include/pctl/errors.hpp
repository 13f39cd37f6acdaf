#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>

namespace pctl {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value violates the contract of a constructor or operation
/// (non-stochastic row, bad grid, mismatched dimensions, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Formula text does not belong to the grammar, or a literal is out of range.
class ParseError : public Error {
public:
    ParseError(std::size_t offset, std::set<std::string> expected, const std::string& message)
        : Error(message), offset_(offset), expected_(std::move(expected)) {}

    /// Byte offset into the formula text where the error was detected.
    std::size_t offset() const noexcept { return offset_; }
    /// Tokens that would have been accepted at offset(). Empty for range errors.
    const std::set<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::set<std::string> expected_;
};

/// A formula references an atomic proposition with no region bound to it.
class UnboundAtom : public Error {
public:
    explicit UnboundAtom(std::string name)
        : Error("unbound atomic proposition '" + name + "'"), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

}  // namespace pctl
