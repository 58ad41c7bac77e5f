#pragma once

#include <cstddef>
#include <limits>

#include "sgronwall/sequences.hpp"

namespace sgronwall {

/// Exponent triple (p, mu, nu) for the Hoelder split of the stochastic
/// Gronwall bound. Requires p in (0,1), nu in [1, 1/p), 1/mu + 1/nu = 1.
/// nu = 1 pairs with mu = +inf, the L^inf (essential supremum) case.
class HolderParams {
public:
    /// Build from p and nu; mu is the Hoelder conjugate of nu.
    HolderParams(double p, double nu);

    /// Build from p and mu; `mu = infinity()` selects nu = 1.
    static HolderParams from_mu(double p, double mu);

    static constexpr double infinity() noexcept { return std::numeric_limits<double>::infinity(); }

    double p() const noexcept { return p_; }
    double nu() const noexcept { return nu_; }
    double mu() const noexcept { return mu_; }
    bool mu_is_infinite() const noexcept { return nu_ == 1.0; }

private:
    double p_;
    double nu_;
    double mu_;
};

/// (1 + 1/(1 - nu p))^{1/nu}.
double holder_prefactor(const HolderParams& hp);

/// Deterministic-weight bound
///     (1 + 1/(1-p)) prod_{k<n} (1 + G_k)^p (E sup_{k<=n} F_k)^p.
double theorem_bound_deterministic_G(double p, const RealSequence& G, std::size_t n, double e_sup_F);

/// General bound: holder_prefactor(hp) * ||prod (1+G_k)^p||_{L^mu} * (E sup F)^p.
/// The caller supplies the L^mu norm (exact, or a Monte Carlo estimate).
double theorem_bound_random_G(const HolderParams& hp, double g_product_p_mu_norm, std::size_t n, double e_sup_F);

/// Inputs of the step-size-independent backward Euler-Maruyama moment bound.
struct AprioriInputs {
    double p = 0.5;
    double L = 0.0;             ///< coercivity constant
    double T = 1.0;             ///< horizon
    double h0 = 0.0;            ///< step-size cap, 2 h0 L < 1
    double x0_norm_sq = 0.0;    ///< |X_0|^2
    double g_x0_norm_sq = 0.0;  ///< |g(X_0)|_F^2

    /// Throws ContractViolation with the first violated constraint.
    void validate() const;
};

/// (1 + 1/(1-p)) exp(p (1-2 h0 L)^{-1} 2 L T)
///     * (|X_0|^2 + (1-2 h0 L)^{-1} (h0 |g(X_0)|^2 + 2 L T))^p
double apriori_bound(const AprioriInputs& inp);

/// One realization of (X_n, F_n, G_n, M_n) on indices 0..n.
///
/// Construction validates nonnegativity, M_0 = 0, equal lengths and the
/// pathwise hypothesis X_k <= F_k + M_k + sum_{j<k} G_j X_j (absolute 1e-12,
/// scaled by max(1, |rhs|)).
class GronwallPathBundle {
public:
    GronwallPathBundle(RealSequence X, RealSequence F, RealSequence G, RealSequence M);

    /// Build X by equality in the hypothesis; throws if some X_k < 0.
    static GronwallPathBundle by_equality(RealSequence F, RealSequence G, RealSequence M);

    const RealSequence& X() const noexcept { return X_; }
    const RealSequence& F() const noexcept { return F_; }
    const RealSequence& G() const noexcept { return G_; }
    const RealSequence& M() const noexcept { return M_; }
    std::size_t horizon() const noexcept { return X_.size() - 1; }

private:
    RealSequence X_, F_, G_, M_;
};

/// L_n = sum_{k<n} (M_{k+1} - M_k) prod_{j=0}^{k} (1 + G_j)^{-1}, with L_0 = 0.
RealSequence transformed_martingale(const GronwallPathBundle& bundle);

struct TransformedBoundCheck {
    bool passed = true;
    std::size_t first_violation = 0;  ///< meaningful only when !passed
    double max_excess = -std::numeric_limits<double>::infinity();
};

/// Checks X_n <= (max_{k<=n} F_k + L_n) prod_{i<n} (1 + G_i) + tol at every n.
TransformedBoundCheck check_transformed_bound(const GronwallPathBundle& bundle, double tol = 1e-9);

}  // namespace sgronwall
