#pragma once

#include <cmath>
#include <cstdint>

#include "core/mathutil.hpp"

namespace puc {

/// splitmix64 step; used to expand one top-level seed into independent
/// named substreams so parallel and sequential evaluation order agree.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_substream(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t s = seed ^ (0x6a09e667f3bcc909ULL + stream_id * 0x9e3779b97f4a7c15ULL);
    splitmix64(s);
    return splitmix64(s);
}

/// xoshiro-free minimal generator: splitmix64 stream with a Box-Muller
/// Gaussian. std::normal_distribution's sample sequence is implementation
/// defined; this one is pinned so outputs stay reproducible everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform in (0, 1]; never returns 0 so log() below is safe.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = two_pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace puc
