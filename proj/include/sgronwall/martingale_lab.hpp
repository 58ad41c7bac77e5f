#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sgronwall/rng.hpp"
#include "sgronwall/sequences.hpp"

namespace sgronwall {

/// One realized discrete martingale path starting at M_0 = 0.
struct MartingalePath {
    RealSequence values;
    std::string generator_id;
    std::size_t step_count = 0;
    bool stopped = false;  ///< true if the stopping rule fired before the last step

    MartingalePath(RealSequence values, std::string generator_id, bool stopped = false);
};

/// sup_{k<=n} M_k and -inf_{k<=n} M_k. Both are >= 0 because M_0 = 0.
struct PathFunctionals {
    double sup_val = 0.0;
    double neg_inf_val = 0.0;
};

/// Level value meaning "never stop" for the random-walk generator.
inline constexpr double kNoStop = -std::numeric_limits<double>::infinity();

/// Symmetric +-1 walk of `steps` steps, frozen once it reaches <= stop_level.
MartingalePath gen_stopped_random_walk(std::size_t steps, double stop_level, RandomStream& rng);

/// Brownian motion sampled on the grid t_k = k h with N(0, h) increments,
/// frozen at the first grid time the value is <= -1, truncated at t_max.
MartingalePath gen_stopped_wiener_discretization(double h, double t_max, RandomStream& rng);

/// Default truncation horizon for the stopped Wiener generator.
inline constexpr double kDefaultWienerHorizon = 1e4;

/// Streaming form of the stopped Wiener generator: returns the path
/// functionals without storing the path. `stopped` reports whether -1 was
/// crossed before t_max.
struct StoppedWienerSummary {
    PathFunctionals functionals;
    bool stopped = false;
    std::size_t steps_taken = 0;
};
StoppedWienerSummary stopped_wiener_summary(double h, double t_max, RandomStream& rng);

/// sup_{t>=0} of Brownian motion stopped at -1, sampled exactly as 1/U - 1.
/// Its survival function is P(sup >= x) = 1/(1+x).
double sample_sup_stopped_bm_exact(RandomStream& rng);

/// Inverse survival map used by the exact sampler; u must lie in (0, 1).
double sup_stopped_bm_from_uniform(double u);

PathFunctionals functionals(const MartingalePath& path);
PathFunctionals functionals(std::span<const double> path);

/// E[(sup M)^p] / (E[-inf M])^p compared against 1/(1-p).
struct LemmaRatio {
    double ratio = 0.0;       ///< NaN when degenerate
    double constant = 0.0;    ///< 1/(1-p)
    bool degenerate = false;  ///< E[-inf M] == 0
    bool vacuous = false;     ///< both expectations are 0 (M is identically 0)
    bool within_bound = true; ///< ratio <= constant; false if degenerate with E[(sup M)^p] > 0
};
LemmaRatio lemma_bound_ratio(double p, double e_sup_p, double e_neg_inf);

/// Bracket pi p / sin(pi p) <= C_p <= 1/(1-p) on the optimal constant, and
/// the ratio R_p = upper / lower.
struct RemarkConstants {
    double lower = 0.0;  ///< pi p / sin(pi p)
    double upper = 0.0;  ///< 1 / (1 - p)
    double ratio = 0.0;  ///< sin(pi p) / (pi p (1 - p))
};
RemarkConstants remark_constants(double p);

/// Exact expectations over all 2^n equiprobable +-1 walks of length n,
/// optionally stopped at `stop_level`.
struct WalkEnumeration {
    std::size_t steps = 0;
    double stop_level = kNoStop;
    std::size_t path_count = 0;
    std::vector<double> p_values;
    std::vector<double> e_sup_p;  ///< E[(sup M)^p] per entry of p_values
    double e_neg_inf = 0.0;       ///< E[-inf M]
    double e_final = 0.0;         ///< E[M_n], zero for a martingale
};

/// n is capped at 24 to keep the 2^n sweep bounded.
WalkEnumeration enumerate_walks(std::size_t steps, double stop_level, std::span<const double> p_values);

}  // namespace sgronwall
