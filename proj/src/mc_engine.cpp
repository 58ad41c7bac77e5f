#include "sgronwall/mc_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "sgronwall/bounds.hpp"
#include "sgronwall/errors.hpp"

namespace sgronwall {

void RunningMoments::push(double x) noexcept {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
}

RunningMoments RunningMoments::merge(const RunningMoments& a, const RunningMoments& b) noexcept {
    if (a.count == 0) return b;
    if (b.count == 0) return a;
    RunningMoments out;
    out.count = a.count + b.count;
    const double na = static_cast<double>(a.count);
    const double nb = static_cast<double>(b.count);
    const double n = static_cast<double>(out.count);
    const double delta = b.mean - a.mean;
    out.mean = a.mean + delta * (nb / n);
    out.m2 = a.m2 + b.m2 + delta * delta * (na * nb / n);
    return out;
}

double RunningMoments::sample_variance() const noexcept {
    return count < 2 ? 0.0 : m2 / static_cast<double>(count - 1);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

struct ChunkResult {
    std::vector<RunningMoments> moments;
    std::size_t failures = 0;
};

// Fixed pairwise tree over chunk results; the shape depends only on the count.
ChunkResult reduce_tree(std::span<const ChunkResult> chunks) {
    if (chunks.size() == 1) return chunks[0];
    const std::size_t mid = chunks.size() / 2;
    ChunkResult left = reduce_tree(chunks.first(mid));
    ChunkResult right = reduce_tree(chunks.subspan(mid));
    for (std::size_t i = 0; i < left.moments.size(); ++i) {
        left.moments[i] = RunningMoments::merge(left.moments[i], right.moments[i]);
    }
    left.failures += right.failures;
    return left;
}

McEstimate to_estimate(const RunningMoments& mom, std::size_t failures, double z) {
    McEstimate est;
    est.mean = mom.mean;
    est.n_samples = mom.count;
    est.std_error = mom.count < 2 ? 0.0 : std::sqrt(mom.sample_variance() / static_cast<double>(mom.count));
    est.z = z;
    est.ci_halfwidth = z * est.std_error;
    est.degenerate = mom.m2 == 0.0;
    est.n_failures = failures;
    return est;
}

}  // namespace

StreamPlan StreamPlan::derive(std::uint64_t tag) const {
    StreamPlan out = *this;
    out.master_seed = splitmix64(master_seed ^ splitmix64(tag + 0x632BE59BD9B4E019ull));
    return out;
}

std::vector<McEstimate> estimate_expectations(const MultiSampler& sampler, std::size_t outputs, std::size_t n,
                                              const StreamPlan& plan, const EstimatorConfig& cfg) {
    detail::require(n >= 2, "Monte Carlo estimation needs at least 2 samples");
    detail::require(outputs >= 1, "sampler must produce at least one output");
    detail::require(plan.chunk_size >= 1, "chunk size must be >= 1");
    detail::require(cfg.z > 0.0, "confidence multiplier z must be > 0");

    const std::size_t chunk = plan.chunk_size;
    const std::size_t n_chunks = (n + chunk - 1) / chunk;
    std::vector<ChunkResult> results(n_chunks);

    auto run_chunk = [&](std::size_t c) {
        ChunkResult res;
        res.moments.assign(outputs, RunningMoments{});
        std::vector<double> values(outputs);
        const std::size_t first = c * chunk;
        const std::size_t last = std::min(n, first + chunk);
        for (std::size_t i = first; i < last; ++i) {
            RandomStream rng = plan.substream(i);
            bool ok = false;
            try {
                ok = sampler(rng, values);
            } catch (const SolverFailure&) {
                ok = false;
            }
            if (!ok) {
                ++res.failures;
                continue;
            }
            for (std::size_t k = 0; k < outputs; ++k) res.moments[k].push(values[k]);
        }
        results[c] = std::move(res);
    };

    const std::size_t workers = std::clamp<std::size_t>(plan.workers, 1, n_chunks);
    if (workers == 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t c = next++; c < n_chunks; c = next++) {
                    try {
                        run_chunk(c);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        next = n_chunks;
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (error) std::rethrow_exception(error);
    }

    const ChunkResult total = reduce_tree(results);
    if (static_cast<double>(total.failures) > cfg.max_failure_rate * static_cast<double>(n)) {
        throw SamplerAborted("sampler failed on " + std::to_string(total.failures) + " of " + std::to_string(n) +
                                 " paths",
                             total.failures, n);
    }
    detail::require(total.moments[0].count >= 1, "no successful samples");

    std::vector<McEstimate> out;
    out.reserve(outputs);
    for (const auto& mom : total.moments) out.push_back(to_estimate(mom, total.failures, cfg.z));
    return out;
}

McEstimate estimate_expectation(const Sampler& sampler, std::size_t n, const StreamPlan& plan,
                                const EstimatorConfig& cfg) {
    const MultiSampler multi = [&sampler](RandomStream& rng, std::span<double> out) {
        const std::optional<double> v = sampler(rng);
        if (!v) return false;
        out[0] = *v;
        return true;
    };
    return estimate_expectations(multi, 1, n, plan, cfg).front();
}

// ---------------------------------------------------------------------------

std::vector<SyntheticSystem> reference_synthetic_systems(std::size_t horizon) {
    std::vector<double> ramp(horizon + 1);
    for (std::size_t k = 0; k <= horizon; ++k) ramp[k] = static_cast<double>(k + 1);
    return {
        {"constant-F", RealSequence::constant(horizon + 1, 1.0), RealSequence::constant(horizon + 1, 0.0),
         SyntheticMartingale::zero, 1.0},
        {"ramp-F-walk", RealSequence(ramp), RealSequence::constant(horizon + 1, 0.0), SyntheticMartingale::random_walk,
         1.0},
        {"ramp-F-walk-G0.1", RealSequence(ramp), RealSequence::constant(horizon + 1, 0.1),
         SyntheticMartingale::random_walk, 1.0},
    };
}

namespace {

double sup_x_power_for(const SyntheticSystem& system, double p, std::vector<double> m) {
    const GronwallPathBundle bundle = GronwallPathBundle::by_equality(system.F, system.G, RealSequence(std::move(m)));
    double sup_x = 0.0;
    for (double x : bundle.X()) sup_x = std::max(sup_x, x);
    return sup_x == 0.0 ? 0.0 : std::pow(sup_x, p);
}

void require_system(const SyntheticSystem& system) {
    detail::require(!system.F.empty() && system.F.size() == system.G.size(),
                    "synthetic system needs F and G of equal nonzero length");
    system.F.require_nonnegative("F");
    system.G.require_nonnegative("G");
}

}  // namespace

double synthetic_sup_x_power(const SyntheticSystem& system, double p, RandomStream& rng) {
    std::vector<double> m(system.horizon() + 1, 0.0);
    if (system.martingale == SyntheticMartingale::random_walk) {
        for (std::size_t k = 1; k < m.size(); ++k) m[k] = m[k - 1] + system.walk_step * rng.sign();
    }
    return sup_x_power_for(system, p, std::move(m));
}

double synthetic_exact_expectation(const SyntheticSystem& system, double p) {
    require_system(system);
    const std::size_t n = system.horizon();
    if (system.martingale == SyntheticMartingale::zero) {
        return sup_x_power_for(system, p, std::vector<double>(n + 1, 0.0));
    }
    detail::require(n <= 20, "exact enumeration is limited to horizon 20");
    const std::size_t paths = std::size_t{1} << n;
    double sum = 0.0;
    std::vector<double> m(n + 1);
    for (std::size_t mask = 0; mask < paths; ++mask) {
        m[0] = 0.0;
        for (std::size_t k = 0; k < n; ++k) m[k + 1] = m[k] + (((mask >> k) & 1u) ? -system.walk_step : system.walk_step);
        sum += sup_x_power_for(system, p, m);
    }
    return sum * std::ldexp(1.0, -static_cast<int>(n));
}

TheoremVerification verify_theorem_on_synthetic(const SyntheticSystem& system, double p, std::size_t n_paths,
                                                const StreamPlan& plan, const EstimatorConfig& cfg) {
    require_system(system);
    TheoremVerification out;
    out.system = system.name;
    out.p = p;
    out.horizon = system.horizon();
    out.n_paths = n_paths;
    out.seed = plan.master_seed;
    out.e_sup_F = *std::max_element(system.F.begin(), system.F.end());
    out.bound = theorem_bound_deterministic_G(p, system.G, out.horizon, out.e_sup_F);
    out.estimate = estimate_expectation(
        [&](RandomStream& rng) -> std::optional<double> { return synthetic_sup_x_power(system, p, rng); }, n_paths,
        plan, cfg);
    if (out.horizon <= 16) out.exact = synthetic_exact_expectation(system, p);
    out.passed = out.estimate.upper_ci() <= out.bound;
    return out;
}

// ---------------------------------------------------------------------------

AprioriVerification verify_apriori(const SdeProblem& problem, std::span<const BemConfig> configs, double p,
                                   std::size_t n_paths, const StreamPlan& plan, const EstimatorConfig& cfg) {
    detail::require(!configs.empty(), "a priori verification needs at least one step size");
    detail::require(p > 0.0 && p < 1.0, "p must lie in (0,1)");
    const double h0 = configs.front().h0();
    const double T = configs.front().T();
    double h_min = configs.front().h();
    double h_max = h_min;
    for (const auto& c : configs) {
        detail::require(c.h0() == h0 && c.T() == T, "all step-size configs must share h0 and T");
        h_min = std::min(h_min, c.h());
        h_max = std::max(h_max, c.h());
    }

    AprioriVerification out;
    out.problem = problem.label;
    out.p = p;
    out.T = T;
    out.h0 = h0;
    out.L = problem.L;
    out.x0_norm_sq = problem.x0.squaredNorm();
    out.g_x0_norm_sq = problem.diffusion(problem.x0).squaredNorm();
    out.seed = plan.master_seed;
    out.n_paths = n_paths;
    out.h_span = h_max / h_min;
    out.bound = apriori_bound({p, problem.L, T, h0, out.x0_norm_sq, out.g_x0_norm_sq});

    const double p_list[] = {p};
    double max_upper = -std::numeric_limits<double>::infinity();
    double est_min = std::numeric_limits<double>::infinity();
    double est_max = -std::numeric_limits<double>::infinity();
    bool all_rows = true;
    for (std::size_t k = 0; k < configs.size(); ++k) {
        const BemConfig& c = configs[k];
        AprioriRow row;
        row.h = c.h();
        row.steps = c.steps();
        const MultiSampler sampler = [&](RandomStream& rng, std::span<double> values) {
            const BemTrajectory traj = simulate_trajectory(problem, c, p_list, rng);
            values[0] = traj.sup_functional[0];
            values[1] = pathwise_recursion_check(traj, problem, c).passed ? 0.0 : 1.0;
            return true;
        };
        try {
            const auto est = estimate_expectations(sampler, 2, n_paths, plan.derive(k), cfg);
            row.estimate = est[0];
            row.failures = est[0].n_failures;
            row.recursion_violations =
                static_cast<std::size_t>(std::llround(est[1].mean * static_cast<double>(est[1].n_samples)));
            row.passed = row.recursion_violations == 0 && row.estimate.upper_ci() <= out.bound;
            max_upper = std::max(max_upper, row.estimate.upper_ci());
            est_min = std::min(est_min, row.estimate.mean);
            est_max = std::max(est_max, row.estimate.mean);
        } catch (const SamplerAborted& e) {
            row.aborted = true;
            row.abort_reason = e.what();
            row.failures = e.failures();
            row.passed = false;
        }
        all_rows = all_rows && row.passed;
        out.rows.push_back(std::move(row));
    }
    if (est_min <= est_max) {
        out.spread = est_max - est_min;
        out.margin = out.bound - max_upper;
        out.h_robust = out.spread < out.margin;
    }
    out.passed = all_rows && out.h_robust;
    return out;
}

}  // namespace sgronwall
