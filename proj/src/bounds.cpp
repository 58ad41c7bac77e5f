#include "sgronwall/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sgronwall/errors.hpp"

namespace sgronwall {

namespace {

void require_exponent(double p) {
    detail::require(p > 0.0 && p < 1.0, "p must lie in (0,1); got " + std::to_string(p));
}

// x^p with 0^p = 0 and +inf^p = +inf.
double power_p(double x, double p, const char* name) {
    detail::require(!std::isnan(x) && x >= 0.0, std::string(name) + " must be a nonnegative number");
    if (x == 0.0) return 0.0;
    return std::pow(x, p);
}

// prod_{k<n} (1 + G_k)^p without overflowing the intermediate product.
double product_power(const RealSequence& G, std::size_t n, double p) {
    const double prod = weight_product(G, 0, n);
    if (std::isfinite(prod)) return std::pow(prod, p);
    return std::exp(p * log_weight_product(G, 0, n));
}

}  // namespace

HolderParams::HolderParams(double p, double nu) : p_(p), nu_(nu) {
    require_exponent(p);
    detail::require(!std::isnan(nu) && nu >= 1.0, "nu must be >= 1; got " + std::to_string(nu));
    detail::require(std::isfinite(nu), "nu = infinity violates p*nu < 1 for every p > 0");
    detail::require(p * nu < 1.0, "p*nu must be < 1; got p*nu = " + std::to_string(p * nu));
    mu_ = nu == 1.0 ? infinity() : nu / (nu - 1.0);
}

HolderParams HolderParams::from_mu(double p, double mu) {
    detail::require(!std::isnan(mu) && mu > 1.0, "mu must lie in (1, inf]; got " + std::to_string(mu));
    if (std::isinf(mu)) return HolderParams(p, 1.0);
    return HolderParams(p, mu / (mu - 1.0));
}

double holder_prefactor(const HolderParams& hp) {
    const double base = 1.0 + 1.0 / (1.0 - hp.nu() * hp.p());
    return hp.mu_is_infinite() ? base : std::pow(base, 1.0 / hp.nu());
}

double theorem_bound_deterministic_G(double p, const RealSequence& G, std::size_t n, double e_sup_F) {
    require_exponent(p);
    G.require_length(n, "G");
    const double prefactor = 1.0 + 1.0 / (1.0 - p);
    return prefactor * product_power(G, n, p) * power_p(e_sup_F, p, "E[sup F]");
}

double theorem_bound_random_G(const HolderParams& hp, double g_product_p_mu_norm, std::size_t /*n*/,
                              double e_sup_F) {
    detail::require(!std::isnan(g_product_p_mu_norm) && g_product_p_mu_norm >= 0.0,
                    "L^mu norm of the weight product must be nonnegative");
    return holder_prefactor(hp) * g_product_p_mu_norm * power_p(e_sup_F, hp.p(), "E[sup F]");
}

void AprioriInputs::validate() const {
    require_exponent(p);
    detail::require(L >= 0.0 && std::isfinite(L), "coercivity constant L must be finite and >= 0");
    detail::require(T > 0.0 && std::isfinite(T), "horizon T must be finite and > 0");
    detail::require(h0 > 0.0 && std::isfinite(h0), "step-size cap h0 must be finite and > 0");
    detail::require(2.0 * h0 * L < 1.0, "2*h0*L must be < 1; got " + std::to_string(2.0 * h0 * L));
    detail::require(x0_norm_sq >= 0.0, "|X0|^2 must be >= 0");
    detail::require(g_x0_norm_sq >= 0.0, "|g(X0)|^2 must be >= 0");
}

double apriori_bound(const AprioriInputs& inp) {
    inp.validate();
    const double inv_margin = 1.0 / (1.0 - 2.0 * inp.h0 * inp.L);
    const double prefactor = 1.0 + 1.0 / (1.0 - inp.p);
    const double growth = std::exp(inp.p * inv_margin * 2.0 * inp.L * inp.T);
    const double base = inp.x0_norm_sq + inv_margin * (inp.h0 * inp.g_x0_norm_sq + 2.0 * inp.L * inp.T);
    return prefactor * growth * power_p(base, inp.p, "a priori base");
}

GronwallPathBundle::GronwallPathBundle(RealSequence X, RealSequence F, RealSequence G, RealSequence M)
    : X_(std::move(X)), F_(std::move(F)), G_(std::move(G)), M_(std::move(M)) {
    const std::size_t len = X_.size();
    detail::require(len > 0, "path bundle must have at least one index");
    detail::require(F_.size() == len && G_.size() == len && M_.size() == len,
                    "X, F, G, M must have equal lengths");
    X_.require_nonnegative("X");
    F_.require_nonnegative("F");
    G_.require_nonnegative("G");
    detail::require(M_[0] == 0.0, "martingale path must start at M_0 = 0");

    double weighted = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
        const double rhs = F_[k] + M_[k] + weighted;
        if (X_[k] > rhs + 1e-12 * std::max(1.0, std::abs(rhs))) {
            throw ContractViolation("Gronwall hypothesis fails at index " + std::to_string(k));
        }
        weighted += G_[k] * X_[k];
    }
}

GronwallPathBundle GronwallPathBundle::by_equality(RealSequence F, RealSequence G, RealSequence M) {
    detail::require(F.size() == G.size() && F.size() == M.size(), "F, G, M must have equal lengths");
    std::vector<double> X(F.size());
    double weighted = 0.0;
    for (std::size_t k = 0; k < F.size(); ++k) {
        X[k] = F[k] + M[k] + weighted;
        if (X[k] < 0.0) {
            throw ContractViolation("X built by equality is negative at index " + std::to_string(k) +
                                    "; F + M must stay nonnegative");
        }
        weighted += G[k] * X[k];
    }
    return GronwallPathBundle(RealSequence(std::move(X)), std::move(F), std::move(G), std::move(M));
}

RealSequence transformed_martingale(const GronwallPathBundle& bundle) {
    const auto& M = bundle.M();
    const auto& G = bundle.G();
    const std::size_t n = bundle.horizon();
    std::vector<double> L(n + 1, 0.0);
    double prod = 1.0;  // prod_{j=0}^{k} (1 + G_j)
    for (std::size_t k = 0; k < n; ++k) {
        prod *= 1.0 + G[k];
        L[k + 1] = L[k] + (M[k + 1] - M[k]) / prod;
    }
    return RealSequence(std::move(L));
}

TransformedBoundCheck check_transformed_bound(const GronwallPathBundle& bundle, double tol) {
    const RealSequence L = transformed_martingale(bundle);
    const auto& X = bundle.X();
    const auto& F = bundle.F();
    const auto& G = bundle.G();

    TransformedBoundCheck out;
    double f_star = 0.0;
    double prod = 1.0;  // prod_{i<m} (1 + G_i)
    for (std::size_t m = 0; m <= bundle.horizon(); ++m) {
        f_star = std::max(f_star, F[m]);
        const double rhs = (f_star + L[m]) * prod;
        const double excess = X[m] - rhs;
        out.max_excess = std::max(out.max_excess, excess);
        if (out.passed && excess > tol * std::max(1.0, std::abs(rhs))) {
            out.passed = false;
            out.first_violation = m;
        }
        prod *= 1.0 + G[m];
    }
    return out;
}

}  // namespace sgronwall
