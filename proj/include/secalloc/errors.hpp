#ifndef SECALLOC_ERRORS_HPP
#define SECALLOC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace secalloc {

// Invalid argument to a math kernel (negative SNR, zero bandwidth, ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Configuration / input file failed validation. `field` is the dotted path
// of the offending entry when known.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& what)
        : std::invalid_argument(field.empty() ? what : field + ": " + what),
          field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Objective could not be evaluated at a probe point. Carries the coordinate
// index that produced the non-finite value.
class EvaluationError : public std::runtime_error {
public:
    EvaluationError(std::size_t coordinate, const std::string& what)
        : std::runtime_error(what), coordinate_(coordinate) {}
    std::size_t coordinate() const noexcept { return coordinate_; }

private:
    std::size_t coordinate_;
};

// A rate demand cannot be met at any finite power, or the combined lower
// bounds exceed the channel-use budget. `device` is < 0 for the global case.
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what, int device = -1)
        : std::runtime_error(what), device_(device) {}
    int device() const noexcept { return device_; }

private:
    int device_;
};

// Scenario generation gave up (resampling cap hit).
class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Solver produced a non-finite objective or an internally inconsistent state.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace secalloc

#endif
