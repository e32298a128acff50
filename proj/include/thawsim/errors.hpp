#pragma once

#include <stdexcept>
#include <string>

namespace thawsim {

/// Invalid user configuration or geometry.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a constitutive map.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A step could not be completed; the caller should retry with a smaller dt.
class StepRejected : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unrecoverable solver failure (singular system, dt underflow).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace thawsim
