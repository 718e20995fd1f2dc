#pragma once

#include <stdexcept>
#include <string>

namespace entimg {

/// Malformed input: bad parameters, mismatched grids, schema violations.
/// `field()` names the offending parameter or document path when known.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& message);
    explicit ValidationError(const std::string& message) : ValidationError({}, message) {}

    const std::string& field() const noexcept { return field_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string field_;
    std::string message_;
};

/// Well-formed input without a physical answer (e.g. zero coincidence rate).
class PhysicsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace entimg
