#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File parsing / serialization problems, message carries the line number.
class FormatError : public Error {
public:
    using Error::Error;
};

class ParameterError : public Error {
public:
    using Error::Error;
};

/// Degenerate point configurations (rank-deficient frames, empty cells, ...).
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Iterative solver failure; keeps the residual history for diagnosis.
class SolveError : public Error {
public:
    SolveError(const std::string& msg, std::vector<double> history = {})
        : Error(msg), residual_history(std::move(history)) {}

    std::vector<double> residual_history;
};

} // namespace pim
