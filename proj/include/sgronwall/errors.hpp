#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sgronwall {

/// A violated input contract: bad parameter ranges, negative weights,
/// mismatched lengths, out-of-range indices.
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The implicit step solver failed to reach its residual tolerance.
class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& what, double residual, std::size_t step_index = 0)
        : std::runtime_error(what), residual_(residual), step_index_(step_index) {}

    double residual() const noexcept { return residual_; }
    std::size_t step_index() const noexcept { return step_index_; }

private:
    double residual_;
    std::size_t step_index_;
};

/// A Monte Carlo estimate was aborted because too many samples failed.
class SamplerAborted : public std::runtime_error {
public:
    SamplerAborted(const std::string& what, std::size_t failures, std::size_t attempted)
        : std::runtime_error(what), failures_(failures), attempted_(attempted) {}

    std::size_t failures() const noexcept { return failures_; }
    std::size_t attempted() const noexcept { return attempted_; }

private:
    std::size_t failures_;
    std::size_t attempted_;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ContractViolation(msg);
}

}  // namespace detail

}  // namespace sgronwall
