#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgronwall/rng.hpp"

namespace sgronwall {

/// Upper bound on state and noise dimension; keeps states on the stack.
inline constexpr int kMaxDim = 4;

using State = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using Noise = State;  // m-dimensional Wiener increment

/// Autonomous SDE dX = f(X) dt + g(X) dW on R^d driven by m-dim noise.
///
/// `L` is the coercivity constant: <f(x), x> + |g(x)|_F^2 / 2 <= L (1 + |x|^2).
/// `one_sided_lipschitz` is c with <f(x)-f(y), x-y> <= c |x-y|^2; the implicit
/// step has a unique root whenever h c < 1.
struct SdeProblem {
    std::string label;
    std::size_t d = 1;
    std::size_t m = 1;
    std::function<State(const State&)> drift;
    std::function<Matrix(const State&)> diffusion;
    /// Optional analytic drift Jacobian; central differences are used otherwise.
    std::function<Matrix(const State&)> drift_jacobian;
    State x0;
    double L = 0.0;
    double one_sided_lipschitz = 0.0;
};

struct CoercivityCheck {
    bool passed = true;
    double worst_excess = 0.0;  ///< max of lhs - rhs over sampled points
    State worst_point;
    std::size_t points = 0;
};

/// Spot-check the coercivity inequality at `points` random states drawn
/// uniformly from the ball of radius `radius`.
CoercivityCheck check_coercivity(const SdeProblem& problem, std::size_t points = 10000, double radius = 100.0,
                                 std::uint64_t seed = 0x5eed);

/// Validate dimensions and the coercivity spot-check; throws ContractViolation.
void validate_problem(const SdeProblem& problem);

struct SolverConfig {
    double tolerance = 1e-12;  ///< residual tolerance, scaled by max(1, |rhs|)
    std::size_t max_iterations = 50;
    double fd_perturbation = 1e-7;  ///< central-difference step is this times (1 + |z|)
    bool bisection_fallback = true;  ///< scalar problems only
};

/// Step size, horizon and solver for one backward Euler-Maruyama run.
class BemConfig {
public:
    /// Validates 0 < h < h0, 2 h0 L < 1, h c < 1 and that at least one step fits.
    BemConfig(double h, double h0, double T, const SdeProblem& problem, SolverConfig solver = {});

    double h() const noexcept { return h_; }
    double h0() const noexcept { return h0_; }
    double T() const noexcept { return T_; }
    /// Largest N with N h <= T (tolerating rounding when T/h is integral).
    std::size_t steps() const noexcept { return steps_; }
    const SolverConfig& solver() const noexcept { return solver_; }

private:
    double h_, h0_, T_;
    std::size_t steps_;
    SolverConfig solver_;
};

/// N_h with N_h h <= T < (N_h + 1) h.
std::size_t step_count(double T, double h);

struct StepResult {
    State y_next;
    std::size_t iterations = 0;
    double residual = 0.0;
    bool used_bisection = false;
};

/// Solve y_next = y + h f(y_next) + g(y) dW. Throws SolverFailure on
/// non-convergence.
StepResult bem_step(const SdeProblem& problem, const State& y, const Noise& dW, double h,
                    const SolverConfig& solver = {});

/// Residual norm |z - y - h f(z) - g(y) dW|.
double bem_residual(const SdeProblem& problem, const State& y, const Noise& dW, double h, const State& z);

/// |g_y dW|^2 - h |g_y|_F^2 + 2 <g_y dW, y>.
double z_increment(const State& y, const Matrix& g_y, const Noise& dW, double h);

struct BemTrajectory {
    double h = 0.0;
    std::vector<State> states;    ///< Y^0 .. Y^N
    std::vector<Noise> dW;        ///< increments for steps 1..N
    std::vector<double> z_increments;  ///< Z^1 .. Z^N
    std::vector<double> p_values;
    std::vector<double> sup_functional;  ///< sup_j (|Y^j|^2 + h |g(Y^j)|^2)^p per p
    std::vector<std::size_t> iterations;  ///< solver iterations per step
};

/// Run the scheme with N(0, h I_m) increments from `rng`. A failed step is
/// rethrown as SolverFailure carrying the 1-based step index.
BemTrajectory simulate_trajectory(const SdeProblem& problem, const BemConfig& cfg, std::span<const double> p_values,
                                  RandomStream& rng);

/// Deterministic variant driven by caller-supplied increments.
BemTrajectory simulate_trajectory(const SdeProblem& problem, const BemConfig& cfg, std::span<const double> p_values,
                                  std::span<const Noise> increments);

/// |Y|^2 + h |g(Y)|^2
double energy(const SdeProblem& problem, const State& y, double h);

struct RecursionCheck {
    bool passed = true;
    std::size_t first_violation = 0;
    double max_relative_excess = -std::numeric_limits<double>::infinity();
};

/// Verify at every n <= N:
///   (1-2hL)|Y^n|^2 + h|g(Y^n)|^2 <= (1-2hL)|Y^0|^2 + h|g(Y^0)|^2 + 2 L t_n
///                                   + sum_{j<n} Z^{j+1} + 2hL sum_{j<n} |Y^j|^2
/// with relative slack `rel_tol` on the magnitude of the right-hand terms.
RecursionCheck pathwise_recursion_check(const BemTrajectory& traj, const SdeProblem& problem,
                                        const BemConfig& cfg, double rel_tol = 1e-8);

}  // namespace sgronwall
