#pragma once

#include <cstdint>

#include "plcisdf/mathfn.hpp"

namespace plcisdf {

namespace detail {
/// splitmix64 finalizer (stateless mixing function).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
} // namespace detail

/// Deterministic counter-seeded generator. Substreams derived from a (seed,
/// stream) pair are decorrelated, so parallel consumers can each own one and
/// produce results independent of scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(detail::mix64(seed) ^ 0x6a09e667f3bcc909ULL) {}

    /// Generator for logical substream `stream` of `seed` (one per trial/worker).
    static Rng substream(std::uint64_t seed, std::uint64_t stream) {
        Rng r(0);
        r.state_ = detail::mix64(detail::mix64(seed) + 0x9e3779b97f4a7c15ULL * (stream + 1));
        return r;
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double strictly inside (0,1), 53-bit resolution.
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via inverse-CDF: exactly one uniform consumed per draw.
    double standard_normal() {
        return inverse_normal_cdf(uniform01());
    }

    bool bernoulli(double p) {
        return uniform01() < p;
    }

private:
    std::uint64_t state_;
};

} // namespace plcisdf
