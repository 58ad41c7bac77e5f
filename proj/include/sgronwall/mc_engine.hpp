#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgronwall/rng.hpp"
#include "sgronwall/sde_bem.hpp"
#include "sgronwall/sequences.hpp"

namespace sgronwall {

/// Single-pass mean and centered second moment (Welford), with an exact
/// pairwise merge.
struct RunningMoments {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void push(double x) noexcept;
    static RunningMoments merge(const RunningMoments& a, const RunningMoments& b) noexcept;
    double sample_variance() const noexcept;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    double z = 1.96;
    double ci_halfwidth = 0.0;  ///< z * std_error
    bool degenerate = false;    ///< zero sample variance
    std::size_t n_failures = 0;

    double upper_ci() const noexcept { return mean + ci_halfwidth; }
    double lower_ci() const noexcept { return mean - ci_halfwidth; }
};

/// How per-path random streams are derived and how work is split.
///
/// Path i always draws from RandomStream(master_seed, i); workers only decide
/// who computes which chunk, never what a chunk contains.
struct StreamPlan {
    std::uint64_t master_seed = 0;
    std::size_t workers = 1;
    std::size_t chunk_size = 4096;

    RandomStream substream(std::uint64_t path_index) const { return RandomStream(master_seed, path_index); }

    /// Independent plan for a sub-experiment; the seed is a pure function of
    /// (master_seed, tag).
    StreamPlan derive(std::uint64_t tag) const;
};

struct EstimatorConfig {
    double z = 1.96;
    double max_failure_rate = 0.01;  ///< abort when failures / n exceeds this
};

/// Writes `outputs` values per path into the span; returns false on failure.
/// A thrown SolverFailure also counts as a failed path.
using MultiSampler = std::function<bool(RandomStream&, std::span<double>)>;
using Sampler = std::function<std::optional<double>(RandomStream&)>;

/// Estimates several expectations from the same paths. The result is
/// bit-identical for any plan.workers. Throws SamplerAborted when the failure
/// rate exceeds the configured threshold.
std::vector<McEstimate> estimate_expectations(const MultiSampler& sampler, std::size_t outputs, std::size_t n,
                                              const StreamPlan& plan, const EstimatorConfig& cfg = {});

McEstimate estimate_expectation(const Sampler& sampler, std::size_t n, const StreamPlan& plan,
                                const EstimatorConfig& cfg = {});

// ---------------------------------------------------------------------------
// Synthetic verification of the deterministic-weight stochastic Gronwall bound

enum class SyntheticMartingale { zero, random_walk };

/// Deterministic F and G with a martingale family. X is built by equality in
/// the Gronwall hypothesis, so F_k + M_k must stay >= 0 along every path.
struct SyntheticSystem {
    std::string name;
    RealSequence F;  ///< length horizon + 1
    RealSequence G;  ///< length horizon + 1
    SyntheticMartingale martingale = SyntheticMartingale::zero;
    double walk_step = 1.0;  ///< increment size of the +-walk

    std::size_t horizon() const noexcept { return F.size() - 1; }
};

/// The three reference systems: constant F without noise, F_n = n+1 with a
/// +-1 walk, and the same with G = 0.1.
std::vector<SyntheticSystem> reference_synthetic_systems(std::size_t horizon);

/// sup_{k<=n} X_k^p for one path of the system.
double synthetic_sup_x_power(const SyntheticSystem& system, double p, RandomStream& rng);

/// Exact E[sup_k X_k^p] by enumerating every walk path (horizon <= 20).
double synthetic_exact_expectation(const SyntheticSystem& system, double p);

struct TheoremVerification {
    std::string system;
    double p = 0.0;
    std::size_t horizon = 0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    McEstimate estimate;
    double e_sup_F = 0.0;
    double bound = 0.0;
    std::optional<double> exact;  ///< enumeration value when affordable
    bool passed = false;          ///< estimate.upper_ci() <= bound
};

TheoremVerification verify_theorem_on_synthetic(const SyntheticSystem& system, double p, std::size_t n_paths,
                                                const StreamPlan& plan, const EstimatorConfig& cfg = {});

// ---------------------------------------------------------------------------
// Step-size independence of the backward Euler-Maruyama moment bound

struct AprioriRow {
    double h = 0.0;
    std::size_t steps = 0;
    McEstimate estimate;
    bool aborted = false;
    std::string abort_reason;
    std::size_t failures = 0;
    std::size_t recursion_violations = 0;  ///< paths failing the pathwise energy recursion
    bool passed = false;
};

struct AprioriVerification {
    std::string problem;
    double p = 0.0;
    double T = 0.0;
    double h0 = 0.0;
    double L = 0.0;
    double x0_norm_sq = 0.0;
    double g_x0_norm_sq = 0.0;
    std::uint64_t seed = 0;
    std::size_t n_paths = 0;
    double bound = 0.0;
    std::vector<AprioriRow> rows;
    double h_span = 0.0;   ///< max h / min h
    double spread = 0.0;   ///< max estimate - min estimate
    double margin = 0.0;   ///< bound - max upper CI
    bool h_robust = false; ///< spread < margin
    bool passed = false;   ///< every row passed
};

/// All configs must share h0 and T. A grid narrower than a factor of 8 is
/// reported through h_span but not rejected.
AprioriVerification verify_apriori(const SdeProblem& problem, std::span<const BemConfig> configs, double p,
                                   std::size_t n_paths, const StreamPlan& plan, const EstimatorConfig& cfg = {});

}  // namespace sgronwall
