#ifndef PIXCAL_ERRORS_HPP
#define PIXCAL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pixcal {

/// Thrown when an input value or structure violates a documented precondition.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Thrown when a file cannot be read, written, or parsed.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Thrown when iterative training produces a non-finite loss.
class TrainingDivergedError : public std::runtime_error {
public:
    explicit TrainingDivergedError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace pixcal

#endif
