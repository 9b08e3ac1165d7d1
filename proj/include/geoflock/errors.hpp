#pragma once

#include <stdexcept>
#include <string>

namespace geoflock {

/// Caller passed inconsistent arguments (mismatched spaces, wrong family, bad sizes).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain where an operation is defined (cut locus, radius too large, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Problem size exceeds a configured cap.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed config or input file; `where` names the field or line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string &where, const std::string &what)
        : std::runtime_error(where + ": " + what), where_(where) {}
    const std::string &where() const { return where_; }

private:
    std::string where_;
};

} // namespace geoflock
