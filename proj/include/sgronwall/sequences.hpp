#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace sgronwall {

/// Finite real sequence indexed from 0. Immutable after construction.
///
/// Entries must be finite. Weight sequences (g_n, G_n) are additionally
/// required to be nonnegative; use `RealSequence::weights` to build one, or
/// `require_nonnegative` at the call site of an operation that needs it.
class RealSequence {
public:
    RealSequence() = default;
    explicit RealSequence(std::vector<double> values);
    RealSequence(std::initializer_list<double> values);

    /// Build a sequence and validate that every entry is >= 0.
    static RealSequence weights(std::vector<double> values);

    /// Constant sequence of length `length`.
    static RealSequence constant(std::size_t length, double value);

    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double at(std::size_t i) const;

    std::span<const double> values() const noexcept { return values_; }
    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    bool is_nonnegative() const noexcept;

    /// Throws ContractViolation naming the first negative index.
    void require_nonnegative(const char* name) const;

    /// Throws ContractViolation if the sequence has fewer than `length` entries.
    void require_length(std::size_t length, const char* name) const;

    friend bool operator==(const RealSequence&, const RealSequence&) = default;

private:
    std::vector<double> values_;
};

/// Product of (1 + g_j) for j in [first, last). Empty range gives 1.
///
/// Switches to log-space accumulation once a partial product would exceed
/// 1e300; the result may still be +inf if the true product is past DBL_MAX.
double weight_product(const RealSequence& g, std::size_t first, std::size_t last);

/// Natural log of `weight_product`, always accumulated with log1p.
double log_weight_product(const RealSequence& g, std::size_t first, std::size_t last);

/// Closed-form discrete Gronwall bound
///     f_n + sum_{k<n} f_k g_k prod_{j=k+1}^{n-1} (1 + g_j).
///
/// `f` and `g` need at least n+1 entries; `g` must be nonnegative. Signed
/// `f` is allowed.
double gronwall_closed_form(const RealSequence& f, const RealSequence& g, std::size_t n);

/// Sequence y_0..y_n satisfying the recursion with equality:
///     y_k = f_k + sum_{i<k} g_i y_i.
/// It is the largest sequence obeying the recursive inequality.
RealSequence gronwall_recursive_envelope(const RealSequence& f, const RealSequence& g, std::size_t n);

/// Left side of the telescoping identity
///     1 + sum_{i=k}^{n-1} g_i prod_{j=k}^{i-1} (1 + g_j),
/// which equals prod_{j=k}^{n-1} (1 + g_j). Requires 0 <= k <= n-1.
double telescoping_identity_lhs(const RealSequence& g, std::size_t k, std::size_t n);

}  // namespace sgronwall
