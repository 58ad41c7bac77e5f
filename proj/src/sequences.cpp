#include "sgronwall/sequences.hpp"

#include <cmath>
#include <string>

#include "sgronwall/errors.hpp"

namespace sgronwall {

namespace {

constexpr double kProductOverflowGuard = 1e300;

void require_weights_on(const RealSequence& g, std::size_t first, std::size_t last, const char* name) {
    for (std::size_t j = first; j < last; ++j) {
        if (!(g[j] >= 0.0)) {
            throw ContractViolation(std::string(name) + " must be nonnegative; entry " + std::to_string(j) +
                                    " is " + std::to_string(g[j]));
        }
    }
}

}  // namespace

RealSequence::RealSequence(std::vector<double> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw ContractViolation("sequence entry " + std::to_string(i) + " is not finite");
        }
    }
}

RealSequence::RealSequence(std::initializer_list<double> values) : RealSequence(std::vector<double>(values)) {}

RealSequence RealSequence::weights(std::vector<double> values) {
    RealSequence seq(std::move(values));
    seq.require_nonnegative("weight sequence");
    return seq;
}

RealSequence RealSequence::constant(std::size_t length, double value) {
    return RealSequence(std::vector<double>(length, value));
}

double RealSequence::at(std::size_t i) const {
    if (i >= values_.size()) {
        throw ContractViolation("index " + std::to_string(i) + " out of range for sequence of length " +
                                std::to_string(values_.size()));
    }
    return values_[i];
}

bool RealSequence::is_nonnegative() const noexcept {
    for (double v : values_) {
        if (v < 0.0) return false;
    }
    return true;
}

void RealSequence::require_nonnegative(const char* name) const {
    require_weights_on(*this, 0, values_.size(), name);
}

void RealSequence::require_length(std::size_t length, const char* name) const {
    if (values_.size() < length) {
        throw ContractViolation(std::string(name) + " has " + std::to_string(values_.size()) +
                                " entries, need at least " + std::to_string(length));
    }
}

double log_weight_product(const RealSequence& g, std::size_t first, std::size_t last) {
    detail::require(first <= last, "weight product range is reversed");
    g.require_length(last, "g");
    require_weights_on(g, first, last, "g");
    double log_prod = 0.0;
    for (std::size_t j = first; j < last; ++j) log_prod += std::log1p(g[j]);
    return log_prod;
}

double weight_product(const RealSequence& g, std::size_t first, std::size_t last) {
    detail::require(first <= last, "weight product range is reversed");
    g.require_length(last, "g");
    require_weights_on(g, first, last, "g");
    double prod = 1.0;
    for (std::size_t j = first; j < last; ++j) {
        prod *= 1.0 + g[j];
        if (prod > kProductOverflowGuard) return std::exp(log_weight_product(g, first, last));
    }
    return prod;
}

double gronwall_closed_form(const RealSequence& f, const RealSequence& g, std::size_t n) {
    f.require_length(n + 1, "f");
    g.require_length(n + 1, "g");
    require_weights_on(g, 0, n + 1, "g");

    // Backward sweep: suffix holds prod_{j=k+1}^{n-1} (1 + g_j) when term k is added.
    double sum = 0.0;
    double suffix = 1.0;
    bool overflow = false;
    for (std::size_t k = n; k-- > 0;) {
        sum += f[k] * g[k] * suffix;
        suffix *= 1.0 + g[k];
        if (suffix > kProductOverflowGuard) {
            overflow = true;
            break;
        }
    }
    if (!overflow) return f[n] + sum;

    // Scaled path: factor out the largest suffix product exp(log_suffix[0]).
    std::vector<double> log_suffix(n, 0.0);
    for (std::size_t k = n - 1; k-- > 0;) log_suffix[k] = log_suffix[k + 1] + std::log1p(g[k + 1]);
    const double log_scale = log_suffix[0];
    double scaled = f[n] * std::exp(-log_scale);
    for (std::size_t k = n; k-- > 0;) scaled += f[k] * g[k] * std::exp(log_suffix[k] - log_scale);
    if (scaled == 0.0) return 0.0;
    return std::copysign(std::exp(std::log(std::abs(scaled)) + log_scale), scaled);
}

RealSequence gronwall_recursive_envelope(const RealSequence& f, const RealSequence& g, std::size_t n) {
    f.require_length(n + 1, "f");
    g.require_length(n + 1, "g");
    require_weights_on(g, 0, n + 1, "g");

    std::vector<double> y(n + 1);
    double weighted = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        y[k] = f[k] + weighted;
        if (!std::isfinite(y[k])) {
            throw ContractViolation("recursive envelope overflowed at index " + std::to_string(k));
        }
        weighted += g[k] * y[k];
    }
    return RealSequence(std::move(y));
}

double telescoping_identity_lhs(const RealSequence& g, std::size_t k, std::size_t n) {
    if (n == 0 || k > n - 1) {
        throw ContractViolation("telescoping identity needs 0 <= k <= n-1; got k=" + std::to_string(k) +
                                ", n=" + std::to_string(n));
    }
    g.require_length(n, "g");
    require_weights_on(g, k, n, "g");

    double sum = 1.0;
    double prefix = 1.0;  // prod_{j=k}^{i-1} (1 + g_j)
    for (std::size_t i = k; i < n; ++i) {
        sum += g[i] * prefix;
        prefix *= 1.0 + g[i];
        if (prefix > kProductOverflowGuard) {
            // Restart in scaled form relative to the full product.
            const double log_total = log_weight_product(g, k, n);
            double scaled = std::exp(-log_total);
            double log_prefix = 0.0;
            for (std::size_t r = k; r < n; ++r) {
                scaled += g[r] * std::exp(log_prefix - log_total);
                log_prefix += std::log1p(g[r]);
            }
            return std::exp(std::log(scaled) + log_total);
        }
    }
    return sum;
}

}  // namespace sgronwall
