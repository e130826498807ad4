#pragma once

#include <stdexcept>
#include <string>

namespace mixsem {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke an operation's stated precondition (non-simple graph,
/// support violation, dimension mismatch, ...).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Malformed external input (JSON, CSV, config files).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Numerical breakdown: singular matrices, failed factorizations,
/// exhausted redraw budgets.
class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// The diagonal-completion system of the parameter transfer is degenerate.
class DegenerateTransferError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Spectral-radius precondition of the parameter transfer failed for graph
/// `which` (1 or 2).
class TransferPreconditionError : public ContractError {
public:
    TransferPreconditionError(int which, const std::string& what)
        : ContractError(what), which_(which) {}
    int which() const noexcept { return which_; }

private:
    int which_;
};

class EnumerationTooLarge : public ContractError {
public:
    using ContractError::ContractError;
};

}  // namespace mixsem
