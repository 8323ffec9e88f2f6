#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qzero {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition.
class ContractError : public Error {
public:
    using Error::Error;
};

/// Input data does not follow its file format. Carries the 1-based line when known.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Filesystem failure while reading or persisting data.
class IoError : public Error {
public:
    using Error::Error;
};

/// Transport or protocol failure talking to a remote embedding service.
class RemoteError : public Error {
public:
    RemoteError(const std::string& what, int status = 0) : Error(what), status_(status) {}

    /// HTTP status of the last response, 0 on transport failure.
    int status() const noexcept { return status_; }

private:
    int status_;
};

}  // namespace qzero
