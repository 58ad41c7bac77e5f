#include "sgronwall/martingale_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sgronwall/errors.hpp"

namespace sgronwall {

namespace {

void require_exponent(double p) {
    detail::require(p > 0.0 && p < 1.0, "p must lie in (0,1); got " + std::to_string(p));
}

// x^p with 0^p = 0.
double power_p(double x, double p) { return x == 0.0 ? 0.0 : std::pow(x, p); }

}  // namespace

MartingalePath::MartingalePath(RealSequence values_in, std::string id, bool stopped_in)
    : values(std::move(values_in)), generator_id(std::move(id)), stopped(stopped_in) {
    detail::require(!values.empty(), "martingale path needs at least M_0");
    detail::require(values[0] == 0.0, "martingale path must start at M_0 = 0");
    step_count = values.size() - 1;
}

MartingalePath gen_stopped_random_walk(std::size_t steps, double stop_level, RandomStream& rng) {
    detail::require(stop_level < 0.0, "stop level must be negative");
    std::vector<double> values(steps + 1, 0.0);
    bool frozen = false;
    for (std::size_t k = 1; k <= steps; ++k) {
        if (frozen) {
            values[k] = values[k - 1];
            continue;
        }
        values[k] = values[k - 1] + rng.sign();
        frozen = values[k] <= stop_level;
    }
    // Stopping on the very last step leaves nothing to freeze; still report it.
    return MartingalePath(RealSequence(std::move(values)), "stopped-random-walk", frozen);
}

MartingalePath gen_stopped_wiener_discretization(double h, double t_max, RandomStream& rng) {
    detail::require(h > 0.0, "step h must be positive");
    detail::require(t_max >= h, "t_max must be >= h");
    const auto steps = static_cast<std::size_t>(std::floor(t_max / h));
    const double scale = std::sqrt(h);
    std::vector<double> values(steps + 1, 0.0);
    bool frozen = false;
    for (std::size_t k = 1; k <= steps; ++k) {
        if (frozen) {
            values[k] = values[k - 1];
            continue;
        }
        values[k] = values[k - 1] + scale * rng.normal();
        frozen = values[k] <= -1.0;
    }
    return MartingalePath(RealSequence(std::move(values)), "stopped-wiener", frozen);
}

StoppedWienerSummary stopped_wiener_summary(double h, double t_max, RandomStream& rng) {
    detail::require(h > 0.0, "step h must be positive");
    detail::require(t_max >= h, "t_max must be >= h");
    const auto steps = static_cast<std::size_t>(std::floor(t_max / h));
    const double scale = std::sqrt(h);
    StoppedWienerSummary out;
    double value = 0.0;
    double hi = 0.0;
    double lo = 0.0;
    for (std::size_t k = 1; k <= steps; ++k) {
        value += scale * rng.normal();
        hi = std::max(hi, value);
        lo = std::min(lo, value);
        out.steps_taken = k;
        if (value <= -1.0) {
            out.stopped = true;
            break;
        }
    }
    out.functionals = {hi, -lo};
    return out;
}

double sup_stopped_bm_from_uniform(double u) {
    detail::require(u > 0.0 && u < 1.0, "uniform variate must lie in (0,1)");
    return 1.0 / u - 1.0;
}

double sample_sup_stopped_bm_exact(RandomStream& rng) { return sup_stopped_bm_from_uniform(rng.uniform()); }

PathFunctionals functionals(std::span<const double> path) {
    detail::require(!path.empty() && path[0] == 0.0, "path must start at 0");
    const auto [lo, hi] = std::minmax_element(path.begin(), path.end());
    return {*hi, -*lo};
}

PathFunctionals functionals(const MartingalePath& path) { return functionals(path.values.values()); }

LemmaRatio lemma_bound_ratio(double p, double e_sup_p, double e_neg_inf) {
    require_exponent(p);
    detail::require(e_sup_p >= 0.0 && e_neg_inf >= 0.0, "expectations of sup^p and -inf must be >= 0");
    LemmaRatio out;
    out.constant = 1.0 / (1.0 - p);
    if (e_neg_inf == 0.0) {
        out.degenerate = true;
        out.vacuous = e_sup_p == 0.0;
        out.ratio = std::numeric_limits<double>::quiet_NaN();
        out.within_bound = out.vacuous;
        return out;
    }
    out.ratio = e_sup_p / std::pow(e_neg_inf, p);
    out.within_bound = out.ratio <= out.constant;
    return out;
}

RemarkConstants remark_constants(double p) {
    require_exponent(p);
    const double pip = std::numbers::pi * p;
    const double s = std::sin(pip);
    return {pip / s, 1.0 / (1.0 - p), s / (pip * (1.0 - p))};
}

WalkEnumeration enumerate_walks(std::size_t steps, double stop_level, std::span<const double> p_values) {
    detail::require(steps <= 24, "walk enumeration is limited to 24 steps");
    detail::require(stop_level < 0.0, "stop level must be negative");
    for (double p : p_values) require_exponent(p);

    WalkEnumeration out;
    out.steps = steps;
    out.stop_level = stop_level;
    out.path_count = std::size_t{1} << steps;
    out.p_values.assign(p_values.begin(), p_values.end());

    std::vector<double> sum_sup_p(p_values.size(), 0.0);
    double sum_neg_inf = 0.0;
    double sum_final = 0.0;
    for (std::size_t mask = 0; mask < out.path_count; ++mask) {
        double value = 0.0;
        double hi = 0.0;
        double lo = 0.0;
        for (std::size_t k = 0; k < steps; ++k) {
            if (value <= stop_level) break;
            // Bit k clear means an up-step, so mask 0 is the all-up path.
            value += ((mask >> k) & 1u) ? -1.0 : 1.0;
            hi = std::max(hi, value);
            lo = std::min(lo, value);
        }
        for (std::size_t i = 0; i < p_values.size(); ++i) sum_sup_p[i] += power_p(hi, p_values[i]);
        sum_neg_inf += -lo;
        sum_final += value;
    }

    // Each path has probability 2^-n; scaling by a power of two is exact.
    const double weight = std::ldexp(1.0, -static_cast<int>(steps));
    out.e_sup_p.resize(p_values.size());
    for (std::size_t i = 0; i < p_values.size(); ++i) out.e_sup_p[i] = sum_sup_p[i] * weight;
    out.e_neg_inf = sum_neg_inf * weight;
    out.e_final = sum_final * weight;
    return out;
}

}  // namespace sgronwall
