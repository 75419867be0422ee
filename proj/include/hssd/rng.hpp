#ifndef HSSD_RNG_HPP
#define HSSD_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace hssd {

// splitmix64 step; used only to whiten seeds before feeding the engine.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Sub-stream domains keep RNG streams disjoint when the same user seed is
// reused across pipeline stages (chains, bootstrap resamples, theta draws...).
enum class RngDomain : std::uint64_t {
    generic   = 0,
    chain     = 1,
    bootstrap = 2,
    theta     = 3,
    synthesis = 4,
    community = 5,
};

inline std::uint64_t derive_seed(std::uint64_t seed, RngDomain domain, std::uint64_t index) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(domain) + 1)));
    return splitmix64(h ^ index);
}

// Deterministic random stream. All draws go through explicit formulas
// (never std::*_distribution, whose output is implementation-defined), so
// sequences are reproducible bit-for-bit for a given (seed, domain, index).
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : eng_(splitmix64(seed)) {}
    RngStream(std::uint64_t seed, RngDomain domain, std::uint64_t index)
        : eng_(derive_seed(seed, domain, index)) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform on [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Uniform integer on [0, n), unbiased via rejection.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via Box-Muller; the spare value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mu, double sd) { return mu + sd * normal(); }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace hssd

#endif // HSSD_RNG_HPP
