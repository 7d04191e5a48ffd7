#pragma once

#include <stdexcept>
#include <string>

namespace riskpen {

enum class ErrorKind {
    InvalidArgument,
    ShapeMismatch,
    EllipticityViolation,
    NumericalDegeneracy,
    Diverged,
    InsufficientData,
    Config,
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` tells callers what failed.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) {
        throw Error(kind, message);
    }
}

} // namespace riskpen
