#pragma once

#include <stdexcept>
#include <string>

namespace pinnse {

// Caller broke an API precondition (dimension mismatch, bad argument).
struct contract_error : std::invalid_argument {
    explicit contract_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Input text could not be parsed; carries a 1-based line number when known.
struct parse_error : std::runtime_error {
    int line;
    parse_error(const std::string& msg, int line_no = 0)
        : std::runtime_error(line_no > 0 ? msg + " (line " + std::to_string(line_no) + ")" : msg),
          line(line_no) {}
};

// Parsed data violates a model invariant (two slack buses, disconnected network...).
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Experiment/scenario configuration is unusable. CLI exit code 2.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Dataset synthesis failed (e.g. a power-flow step diverged). CLI exit code 3.
struct generation_error : std::runtime_error {
    explicit generation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A linear system or factorization turned out singular.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Model training failed. CLI exit code 4.
struct training_error : std::runtime_error {
    explicit training_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace pinnse
