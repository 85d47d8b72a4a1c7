#pragma once

#include <cmath>
#include <cstdint>

namespace svypool {

/// Counter-based pseudo-random stream keyed by (seed, replicate, stream).
///
/// Each Monte Carlo replicate derives its own stream, so parallel and serial
/// execution consume exactly the same numbers. The generator is the splitmix64
/// sequence; bounded draws use Lemire's multiply-shift rejection and normal
/// draws use Box-Muller, both implemented here so that output does not depend
/// on the standard library's distribution internals.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t stream) {
        state_ = mix(mix(mix(seed) ^ replicate) ^ stream);
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix_final(state_);
    }

    /// Uniform double in [0,1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound) by bitmask rejection; unbiased and
    /// portable, expected under two generator calls per draw.
    std::uint64_t next_below(std::uint64_t bound) {
        std::uint64_t mask = bound - 1;
        mask |= mask >> 1;
        mask |= mask >> 2;
        mask |= mask >> 4;
        mask |= mask >> 8;
        mask |= mask >> 16;
        mask |= mask >> 32;
        while (true) {
            const std::uint64_t value = next_u64() & mask;
            if (value < bound) return value;
        }
    }

    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_unit();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = next_unit();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    static std::uint64_t mix_final(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    static std::uint64_t mix(std::uint64_t z) {
        return mix_final(z + 0x9E3779B97F4A7C15ULL);
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

namespace rng_stream {
// Stream ids: keep draw streams distinct from synthetic-population streams.
inline constexpr std::uint64_t household_sampling = 0;
inline constexpr std::uint64_t synthetic_sizes = 100;
inline constexpr std::uint64_t synthetic_household_effect = 101;
inline constexpr std::uint64_t synthetic_person_noise = 102;
} // namespace rng_stream

} // namespace svypool
