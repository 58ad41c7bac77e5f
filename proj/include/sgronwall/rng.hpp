#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace sgronwall {

/// Philox4x32-10 block function: maps (counter, key) to 128 random bits.
/// Stateless and deterministic, which is what makes substreams reproducible.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept;

/// Random stream keyed by (seed, stream_id).
///
/// The counter layout is [block_lo, block_hi, stream_lo, stream_hi] and the
/// key is the 64-bit seed, so every (seed, stream_id) pair owns a disjoint
/// slice of 2^64 blocks. Stream i produces the same numbers regardless of
/// which thread runs it or in which order streams are consumed.
///
/// Satisfies UniformRandomBitGenerator.
class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return next_u64(); }

    std::uint64_t next_u64() noexcept;

    /// Uniform on the open interval (0, 1); never returns 0 or 1.
    double uniform() noexcept;

    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double normal() noexcept;

    /// Fair +1/-1 sign.
    int sign() noexcept { return (next_u64() >> 63) ? 1 : -1; }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    PhiloxCounter buffer_{};
    int buffered_words_ = 0;  // 64-bit words left in buffer_ (0, 1 or 2)
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace sgronwall
