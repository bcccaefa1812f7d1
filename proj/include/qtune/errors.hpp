#pragma once

#include <stdexcept>
#include <string>

namespace qtune {

/// Violation of a documented precondition or type invariant.
class ContractViolation : public std::logic_error {
public:
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

/// Bad user-supplied configuration (unknown method name, malformed file, ...).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// I/O failure, reported with path context.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
inline void require(bool cond, const char* msg) {
    if (!cond) throw ContractViolation(msg);
}
}  // namespace detail

}  // namespace qtune
