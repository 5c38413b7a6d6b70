#pragma once

#include <stdexcept>
#include <string>

namespace vser {

// Base class for everything this library throws on purpose.
struct VserError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (wrong depth, wrong agent count, ...).
struct ContractViolation : VserError {
    using VserError::VserError;
};

// A model failed validation. Carries the table and the offending index so the
// CLI can point at the culprit.
struct ModelError : VserError {
    ModelError(const std::string& table, const std::string& index, const std::string& what)
        : VserError(table + "[" + index + "]: " + what), table(table), index(index) {}
    std::string table;
    std::string index;
};

// An operation was asked of a model kind it does not support
// (e.g. state-based backward induction on a partially observed game).
struct UnsupportedModel : VserError {
    using VserError::VserError;
};

// Malformed game text. Position is 1-based.
struct ParseError : VserError {
    ParseError(std::string file, int line, int col, const std::string& message)
        : VserError(file + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + message),
          file(std::move(file)), line(line), col(col), message(message) {}
    std::string file;
    int line;
    int col;
    std::string message;
};

// A configured resource budget (node count, expansion count) was exceeded.
struct BudgetExceeded : VserError {
    using VserError::VserError;
};

// A value was requested for a history that has probability zero.
struct ImpossibleHistory : VserError {
    using VserError::VserError;
};

}  // namespace vser
