#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssm {

// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller broke a precondition (dimension mismatch, bad argument).
class ContractError : public Error {
public:
    using Error::Error;
};

// A numerical procedure failed to produce a trustworthy answer.
class NumericalError : public Error {
public:
    using Error::Error;
};

// A linear system or resolvent was (numerically) singular.
class SingularError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// No stage count up to the cap met the requested tolerance.
class PlanningError : public NumericalError {
public:
    PlanningError(const std::string& what, std::size_t best_stages, double best_value)
        : NumericalError(what), best_stages_(best_stages), best_value_(best_value) {}

    std::size_t best_stages() const noexcept { return best_stages_; }
    double best_value() const noexcept { return best_value_; }

private:
    std::size_t best_stages_;
    double best_value_;
};

// Malformed file; field() names the offending header field or section.
class FormatError : public Error {
public:
    FormatError(const std::string& field, const std::string& what)
        : Error(what), field_(field) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// A file could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace ssm
