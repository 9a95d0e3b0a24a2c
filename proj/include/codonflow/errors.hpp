#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace codonflow {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-domain user input (bad codon text, unknown residue, STOP inside a design).
class InputError : public Error {
   public:
    using Error::Error;
};

/// Parse failure that knows where it happened.
class ParseError : public InputError {
   public:
    ParseError(const std::string& what, std::size_t position)
        : InputError(what + " (at position " + std::to_string(position) + ")"), position_(position) {}
    std::size_t position() const { return position_; }

   private:
    std::size_t position_;
};

/// Inconsistent settings or missing table entries.
class ConfigError : public Error {
   public:
    using Error::Error;
};

/// A state, mask, or action broke an environment or distribution invariant.
class InvariantError : public Error {
   public:
    using Error::Error;
};

class IllegalActionError : public InvariantError {
   public:
    using InvariantError::InvariantError;
};

class NoParentError : public InvariantError {
   public:
    using InvariantError::InvariantError;
};

/// Non-finite parameters, gradients, or losses.
class NumericError : public Error {
   public:
    using Error::Error;
};

/// API misuse, such as running backward twice over the same tape.
class UsageError : public Error {
   public:
    using Error::Error;
};

/// Enumeration refused because the design space is larger than the cap.
class CapExceededError : public Error {
   public:
    CapExceededError(const std::string& what, std::string exact_size)
        : Error(what), exact_size_(std::move(exact_size)) {}
    const std::string& exact_size() const { return exact_size_; }

   private:
    std::string exact_size_;
};

/// A metric asked for more items than exist; carries how many were available.
class PartialResultError : public Error {
   public:
    PartialResultError(const std::string& what, std::size_t available)
        : Error(what), available_(available) {}
    std::size_t available() const { return available_; }

   private:
    std::size_t available_;
};

}  // namespace codonflow
