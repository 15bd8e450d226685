#pragma once

#include <stdexcept>
#include <string>

namespace smoothlab {

enum class ErrorKind {
    invalid_argument,
    shape_mismatch,
    non_finite,
    domain,
    convergence,
    parse,
    budget,
    missing_artifact,
};

/// Single exception type for the library; `kind()` lets callers (the CLI in
/// particular) map failures onto exit codes without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Parse failure carrying the 0-based character offset of the offending token.
class ParseError : public Error {
public:
    ParseError(std::size_t position, const std::string& what)
        : Error(ErrorKind::parse, what + " at position " + std::to_string(position)),
          position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

}  // namespace smoothlab
