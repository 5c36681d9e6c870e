#pragma once

#include <cstdint>

namespace fraceig {

/// 64-bit linear congruential generator with pinned constants, so random
/// experiments reproduce bit-for-bit across platforms and languages.
///
/// state_{k+1} = 6364136223846793005 * state_k + 1442695040888963407 (mod 2^64)
/// The state is advanced before every draw; uniform() uses the top 53 bits.
class Lcg64 {
public:
    static constexpr std::uint64_t multiplier = 6364136223846793005ULL;
    static constexpr std::uint64_t increment = 1442695040888963407ULL;

    explicit Lcg64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        state_ = state_ * multiplier + increment;
        return state_;
    }

    /// Uniform on [0, 1).
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

}  // namespace fraceig
