// SPDX-License-Identifier: MIT
/// @file errors.hpp
/// @brief Exception types shared by all lvcal modules

#pragma once

#include <stdexcept>
#include <string>

namespace lvcal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (w <= 0, K <= 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Evaluation point outside the range covered by curve, surface or grid data.
class OutOfRangeError : public Error {
public:
    using Error::Error;
};

/// Input data admits calendar or butterfly arbitrage.
class ArbitrageError : public Error {
public:
    using Error::Error;
};

/// Model specification or configuration rejected during validation.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Monte-Carlo estimator could not produce a usable value (too few samples, degenerate input).
class EstimatorError : public Error {
public:
    using Error::Error;
};

/// Non-finite state produced during path simulation.
class SimulationError : public Error {
public:
    using Error::Error;
};

/// Numerical solver failure (root finding, PDE instability).
class SolverError : public Error {
public:
    using Error::Error;
};

/// Malformed input file or config.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace lvcal
