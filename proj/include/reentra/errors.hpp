// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iostream>
#include <stdexcept>
#include <string>

namespace reentra {

/// Base class for everything this library throws.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A caller passed an argument that violates an operation's precondition.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Input data is malformed, unreadable, or fails validation.
class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    using DataError::DataError;
};

class ValidationError : public DataError {
public:
    using DataError::DataError;
};

class LexicalError : public DataError {
public:
    using DataError::DataError;
};

class IoError : public DataError {
public:
    using DataError::DataError;
};

/// An internal invariant was broken (dimension mismatch, corrupt state).
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Non-fatal diagnostics (degenerate denominators, empty corpora, ...).
inline void warn(const std::string& msg) { std::cerr << "[warn] " << msg << "\n"; }

}  // namespace reentra
