#pragma once

#include <stdexcept>
#include <string>

namespace nkcomm {

// Each error carries the process exit code the CLI reports for it.
class Error : public std::runtime_error {
public:
    Error(const std::string& what, int exit_code)
        : std::runtime_error(what), exit_code_(exit_code) {}

    int exit_code() const noexcept { return exit_code_; }

private:
    int exit_code_;
};

/// Invalid user-supplied parameter (k out of range, bad flag value, ...).
class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& what) : Error(what, 2) {}
};

/// Malformed input file; the message names the offending line when known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(what, 2) {}
};

/// Problem size above a configured enumeration or search cap.
class CapacityError : public Error {
public:
    explicit CapacityError(const std::string& what) : Error(what, 3) {}
};

/// Internal invariant broken, or too little data for a statistic.
class InvariantError : public Error {
public:
    explicit InvariantError(const std::string& what) : Error(what, 4) {}
};

} // namespace nkcomm
