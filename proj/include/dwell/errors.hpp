#pragma once

#include <stdexcept>
#include <string>

namespace dwell {

/// Bad user input: configuration keys, mesh/window combinations, resolutions.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Iterative solver failed to reach its tolerance within the iteration cap.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}

    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Caller broke a precondition (size mismatch, non-positive modulus, ...).
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

#define DWELL_REQUIRE(cond, msg)                                              \
    do {                                                                      \
        if (!(cond)) throw ::dwell::ContractError(std::string(msg));          \
    } while (0)

} // namespace dwell
