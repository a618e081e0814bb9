#pragma once

#include <stdexcept>
#include <string>

namespace aff {

/// Malformed or out-of-contract input (dimension mismatch, r <= 0, ...).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation would exceed a configured resource cap.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A measure needed as a denominator is indistinguishable from zero.
class DegenerateDomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluation requested at a point where the quantity may diverge (e.g. xi = e).
class SingularPointError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InputError(msg);
}

}  // namespace aff
