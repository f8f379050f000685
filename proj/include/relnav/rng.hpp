#ifndef RELNAV_RNG_HPP
#define RELNAV_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "relnav/core.hpp"

namespace relnav {

/// splitmix64 step; used as a seed scrambler when deriving independent
/// substream seeds from a base seed plus a salt.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t s = base ^ (0x9e3779b97f4a7c15ULL + (salt << 1));
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b >> 1);
}

/// Deterministic random stream. Draw order is part of the reproducibility
/// contract, so normals use an in-house Box-Muller instead of relying on
/// std::normal_distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        const double two_pi = 6.283185307179586476925286766559;
        spare_ = mag * std::sin(two_pi * u2);
        have_spare_ = true;
        return mag * std::cos(two_pi * u2);
    }

    Vec3 normal3() {
        Vec3 v;
        v[0] = normal();
        v[1] = normal();
        v[2] = normal();
        return v;
    }

    /// Independent child stream; depends only on (base seed, salt), never on
    /// how much of this stream was consumed. Scheduling-safe.
    Rng split(std::uint64_t salt) const { return Rng(mix_seed(seed_, salt)); }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;  // portable across compilers
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace relnav

#endif
