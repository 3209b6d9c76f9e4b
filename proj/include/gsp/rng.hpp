#pragma once

#include <cstdint>
#include <random>

namespace gsp {

/// splitmix64 step; used both as a generator stage and to spread seed bits.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives an independent per-cell seed from (master, n, rep). Experiment
/// cells seeded this way may run in any order or in parallel and still
/// reproduce bit-for-bit.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t n, std::uint64_t rep) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s = a ^ (n * 0xD1342543DE82EF95ULL);
    std::uint64_t b = splitmix64(s);
    s = b ^ (rep * 0xAF251AF3B0F025B5ULL);
    return splitmix64(s);
}

/// Seeded generator with explicitly implemented uniform/normal draws so that
/// streams do not depend on the standard library's distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0,1), 53-bit mantissa.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller; one spare value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace gsp
