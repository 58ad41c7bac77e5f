#include "sgronwall/sde_bem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sgronwall/errors.hpp"

namespace sgronwall {

namespace {

// Scale for residual tolerances and slack: max(1, |v|).
double unit_floor(double v) { return std::max(1.0, std::abs(v)); }

Matrix fd_jacobian(const SdeProblem& problem, const State& z, double perturbation) {
    const auto d = static_cast<Eigen::Index>(problem.d);
    Matrix jac(d, d);
    const double eps = perturbation * (1.0 + z.norm());
    State zp = z;
    State zm = z;
    for (Eigen::Index i = 0; i < d; ++i) {
        zp(i) = z(i) + eps;
        zm(i) = z(i) - eps;
        jac.col(i) = (problem.drift(zp) - problem.drift(zm)) / (2.0 * eps);
        zp(i) = z(i);
        zm(i) = z(i);
    }
    return jac;
}

struct Residual {
    const SdeProblem& problem;
    const State& rhs;  // y + g(y) dW
    double h;

    State operator()(const State& z) const { return z - h * problem.drift(z) - rhs; }
};

// Safeguarded bisection for d = 1, where z - h f(z) is strictly increasing
// when h c < 1.
bool bisect_scalar(const Residual& residual, double tol, std::size_t& iterations, State& z) {
    const double b = residual.rhs(0);
    double width = 1.0 + std::abs(b);
    State lo(1), hi(1);
    lo(0) = b - width;
    hi(0) = b + width;
    for (int grow = 0; grow < 200; ++grow) {
        if (residual(lo)(0) <= 0.0 && residual(hi)(0) >= 0.0) break;
        width *= 2.0;
        lo(0) = b - width;
        hi(0) = b + width;
    }
    if (!(residual(lo)(0) <= 0.0 && residual(hi)(0) >= 0.0)) return false;

    State mid(1);
    for (std::size_t it = 0; it < 2000; ++it) {
        ++iterations;
        mid(0) = 0.5 * (lo(0) + hi(0));
        const double r = residual(mid)(0);
        if (std::abs(r) <= tol) {
            z = mid;
            return true;
        }
        if (mid(0) == lo(0) || mid(0) == hi(0)) break;
        (r < 0.0 ? lo : hi) = mid;
    }
    const double rl = std::abs(residual(lo)(0));
    const double rh = std::abs(residual(hi)(0));
    z = rl <= rh ? lo : hi;
    return std::min(rl, rh) <= tol;
}

}  // namespace

CoercivityCheck check_coercivity(const SdeProblem& problem, std::size_t points, double radius, std::uint64_t seed) {
    RandomStream rng(seed, 0);
    const auto d = static_cast<Eigen::Index>(problem.d);
    CoercivityCheck out;
    out.points = points;
    out.worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points; ++i) {
        State x(d);
        for (Eigen::Index k = 0; k < d; ++k) x(k) = rng.normal();
        const double norm = x.norm();
        if (norm > 0.0) x *= radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d)) / norm;
        const double lhs = problem.drift(x).dot(x) + 0.5 * problem.diffusion(x).squaredNorm();
        const double rhs = problem.L * (1.0 + x.squaredNorm());
        const double excess = lhs - rhs;
        if (excess > out.worst_excess) {
            out.worst_excess = excess;
            out.worst_point = x;
        }
        // Relative slack absorbs rounding in the cancellation of large terms.
        if (excess > 1e-12 * unit_floor(rhs)) out.passed = false;
    }
    return out;
}

void validate_problem(const SdeProblem& problem) {
    detail::require(problem.d >= 1 && problem.d <= static_cast<std::size_t>(kMaxDim),
                    "state dimension must lie in [1, " + std::to_string(kMaxDim) + "]");
    detail::require(problem.m >= 1 && problem.m <= static_cast<std::size_t>(kMaxDim),
                    "noise dimension must lie in [1, " + std::to_string(kMaxDim) + "]");
    detail::require(static_cast<bool>(problem.drift) && static_cast<bool>(problem.diffusion),
                    "problem needs both drift and diffusion");
    detail::require(static_cast<std::size_t>(problem.x0.size()) == problem.d, "x0 must have dimension d");
    detail::require(problem.L >= 0.0 && std::isfinite(problem.L), "coercivity constant L must be finite and >= 0");

    const Matrix g0 = problem.diffusion(problem.x0);
    detail::require(static_cast<std::size_t>(g0.rows()) == problem.d && static_cast<std::size_t>(g0.cols()) == problem.m,
                    "diffusion must return a d x m matrix");

    const CoercivityCheck check = check_coercivity(problem);
    if (!check.passed) {
        throw ContractViolation("problem '" + problem.label + "' fails the coercivity spot-check with L = " +
                                std::to_string(problem.L) + " (worst excess " + std::to_string(check.worst_excess) +
                                ")");
    }
}

std::size_t step_count(double T, double h) {
    detail::require(h > 0.0 && T > 0.0, "step count needs h > 0 and T > 0");
    const double q = T / h;
    const double nearest = std::round(q);
    if (std::abs(q - nearest) <= 1e-9 * unit_floor(q)) return static_cast<std::size_t>(nearest);
    return static_cast<std::size_t>(std::floor(q));
}

BemConfig::BemConfig(double h, double h0, double T, const SdeProblem& problem, SolverConfig solver)
    : h_(h), h0_(h0), T_(T), steps_(0), solver_(solver) {
    detail::require(h0 > 0.0 && std::isfinite(h0), "step-size cap h0 must be finite and > 0");
    detail::require(h > 0.0 && h < h0, "step size must satisfy 0 < h < h0");
    detail::require(2.0 * h0 * problem.L < 1.0,
                    "2*h0*L must be < 1; got " + std::to_string(2.0 * h0 * problem.L));
    detail::require(h * problem.one_sided_lipschitz < 1.0,
                    "h times the one-sided Lipschitz constant must be < 1 for a unique implicit step");
    detail::require(T > 0.0 && std::isfinite(T), "horizon T must be finite and > 0");
    detail::require(solver.tolerance > 0.0, "solver tolerance must be > 0");
    detail::require(solver.max_iterations > 0, "solver needs at least one iteration");
    steps_ = step_count(T, h);
    detail::require(steps_ >= 1, "h > T leaves no steps");
}

double bem_residual(const SdeProblem& problem, const State& y, const Noise& dW, double h, const State& z) {
    const State rhs = y + problem.diffusion(y) * dW;
    return Residual{problem, rhs, h}(z).norm();
}

StepResult bem_step(const SdeProblem& problem, const State& y, const Noise& dW, double h,
                    const SolverConfig& solver) {
    detail::require(static_cast<std::size_t>(y.size()) == problem.d, "state has wrong dimension");
    detail::require(static_cast<std::size_t>(dW.size()) == problem.m, "noise increment has wrong dimension");
    detail::require(h > 0.0, "step size must be > 0");
    detail::require(solver.tolerance > 0.0, "solver tolerance must be > 0");

    const State rhs = y + problem.diffusion(y) * dW;
    const Residual residual{problem, rhs, h};
    const double tol = solver.tolerance * unit_floor(rhs.norm());
    const auto d = static_cast<Eigen::Index>(problem.d);

    StepResult out;
    State z = rhs;
    State r = residual(z);
    double r_norm = r.norm();
    while (r_norm > tol && out.iterations < solver.max_iterations) {
        ++out.iterations;
        const Matrix jf = problem.drift_jacobian ? problem.drift_jacobian(z) : fd_jacobian(problem, z, solver.fd_perturbation);
        const Matrix jac = Matrix::Identity(d, d) - h * jf;
        const State delta = jac.partialPivLu().solve(r);

        // Halve the Newton step until the residual decreases.
        double t = 1.0;
        State trial = z - delta;
        State r_trial = residual(trial);
        while (!(r_trial.norm() < r_norm) && t > 1e-6) {
            t *= 0.5;
            trial = z - t * delta;
            r_trial = residual(trial);
        }
        if (!(r_trial.norm() < r_norm)) break;  // stagnated
        z = trial;
        r = r_trial;
        r_norm = r.norm();
    }

    if (r_norm <= tol) {
        out.y_next = z;
        out.residual = r_norm;
        return out;
    }

    if (problem.d == 1 && solver.bisection_fallback) {
        State root = z;
        if (bisect_scalar(residual, tol, out.iterations, root)) {
            out.y_next = root;
            out.residual = residual(root).norm();
            out.used_bisection = true;
            return out;
        }
        r_norm = std::min(r_norm, residual(root).norm());
    }
    throw SolverFailure("implicit step did not converge; residual " + std::to_string(r_norm), r_norm);
}

double z_increment(const State& y, const Matrix& g_y, const Noise& dW, double h) {
    detail::require(g_y.rows() == y.size() && g_y.cols() == dW.size(), "z_increment: shape mismatch");
    const State gdw = g_y * dW;
    return gdw.squaredNorm() - h * g_y.squaredNorm() + 2.0 * gdw.dot(y);
}

double energy(const SdeProblem& problem, const State& y, double h) {
    return y.squaredNorm() + h * problem.diffusion(y).squaredNorm();
}

namespace {

template <typename NextIncrement>
BemTrajectory run_scheme(const SdeProblem& problem, const BemConfig& cfg, std::span<const double> p_values,
                         NextIncrement&& next_increment) {
    for (double p : p_values) detail::require(p > 0.0 && p < 1.0, "functional exponents must lie in (0,1)");
    const double h = cfg.h();
    const std::size_t steps = cfg.steps();

    BemTrajectory traj;
    traj.h = h;
    traj.p_values.assign(p_values.begin(), p_values.end());
    traj.states.reserve(steps + 1);
    traj.dW.reserve(steps);
    traj.z_increments.reserve(steps);
    traj.iterations.reserve(steps);
    traj.states.push_back(problem.x0);

    double sup_energy = energy(problem, problem.x0, h);
    for (std::size_t j = 0; j < steps; ++j) {
        const State& y = traj.states.back();
        const Noise dW = next_increment(j);
        const Matrix g_y = problem.diffusion(y);
        StepResult step;
        try {
            step = bem_step(problem, y, dW, h, cfg.solver());
        } catch (const SolverFailure& e) {
            throw SolverFailure(std::string(e.what()) + " at step " + std::to_string(j + 1), e.residual(), j + 1);
        }
        traj.z_increments.push_back(z_increment(y, g_y, dW, h));
        traj.iterations.push_back(step.iterations);
        traj.dW.push_back(dW);
        traj.states.push_back(std::move(step.y_next));
        sup_energy = std::max(sup_energy, energy(problem, traj.states.back(), h));
    }
    // x -> x^p is increasing, so sup of powers is the power of the sup.
    traj.sup_functional.reserve(p_values.size());
    for (double p : p_values) traj.sup_functional.push_back(sup_energy == 0.0 ? 0.0 : std::pow(sup_energy, p));
    return traj;
}

}  // namespace

BemTrajectory simulate_trajectory(const SdeProblem& problem, const BemConfig& cfg, std::span<const double> p_values,
                                  RandomStream& rng) {
    const double scale = std::sqrt(cfg.h());
    const auto m = static_cast<Eigen::Index>(problem.m);
    return run_scheme(problem, cfg, p_values, [&](std::size_t) {
        Noise dW(m);
        for (Eigen::Index i = 0; i < m; ++i) dW(i) = scale * rng.normal();
        return dW;
    });
}

BemTrajectory simulate_trajectory(const SdeProblem& problem, const BemConfig& cfg, std::span<const double> p_values,
                                  std::span<const Noise> increments) {
    detail::require(increments.size() >= cfg.steps(), "not enough noise increments for the configured horizon");
    return run_scheme(problem, cfg, p_values, [&](std::size_t j) { return increments[j]; });
}

RecursionCheck pathwise_recursion_check(const BemTrajectory& traj, const SdeProblem& problem, const BemConfig& cfg,
                                        double rel_tol) {
    const double h = cfg.h();
    const double L = problem.L;
    const double damp = 1.0 - 2.0 * h * L;
    const std::size_t steps = traj.states.size() - 1;
    detail::require(traj.z_increments.size() == steps, "trajectory is missing Z increments");

    const State& y0 = traj.states.front();
    const double base = damp * y0.squaredNorm() + h * problem.diffusion(y0).squaredNorm();

    RecursionCheck out;
    double z_sum = 0.0;
    double z_abs = 0.0;
    double y_sq_sum = 0.0;
    for (std::size_t n = 0; n <= steps; ++n) {
        const State& yn = traj.states[n];
        const double lhs = damp * yn.squaredNorm() + h * problem.diffusion(yn).squaredNorm();
        const double drift_term = 2.0 * L * static_cast<double>(n) * h;
        const double rhs = base + drift_term + z_sum + 2.0 * h * L * y_sq_sum;
        const double scale = unit_floor(std::abs(base) + drift_term + z_abs + 2.0 * h * L * y_sq_sum);
        const double rel_excess = (lhs - rhs) / scale;
        out.max_relative_excess = std::max(out.max_relative_excess, rel_excess);
        if (out.passed && rel_excess > rel_tol) {
            out.passed = false;
            out.first_violation = n;
        }
        if (n < steps) {
            z_sum += traj.z_increments[n];
            z_abs += std::abs(traj.z_increments[n]);
            y_sq_sum += yn.squaredNorm();
        }
    }
    return out;
}

}  // namespace sgronwall
