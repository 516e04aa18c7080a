#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tdcs {

// Vector lengths disagree or do not match the expected block size.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An argument is outside its admissible domain.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A value was well-formed but failed a semantic check (non-perfect sequence,
// malformed scenario file, ...). Carries an optional source location.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
    ValidationError(const std::string& source, std::size_t line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
          source_(source), line_(line) {}

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string source_;
    std::size_t line_ = 0;
};

// The requested user count / P-CCSK order does not fit in the circular shift space.
class CapacityError : public std::runtime_error {
public:
    CapacityError(const std::string& what, std::size_t u_max)
        : std::runtime_error(what + " (U_max = " + std::to_string(u_max) + ")"), u_max_(u_max) {}

    std::size_t u_max() const noexcept { return u_max_; }

private:
    std::size_t u_max_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace tdcs
