#pragma once

#include <cstdint>
#include <random>

namespace shearchaos {

// SplitMix64 finalizer. Used for seed derivation so that run seeds are
// stable across platforms and independent of any engine internals.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stream seed for (master_seed, grid_index, run_index). Every protocol run in
// every sweep cell gets its own independent, reproducible stream.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t grid_index,
                                 std::uint64_t run_index) {
    std::uint64_t h = mix64(master_seed);
    h = mix64(h ^ (grid_index + 0x632be59bd9b4e019ULL));
    h = mix64(h ^ (run_index + 0x9e3779b97f4a7c15ULL));
    return h;
}

// Deterministic random stream. The variate transforms are written out
// explicitly (instead of std::*_distribution) so that identical seeds give
// identical draws on every standard library implementation.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // uniform on [0, 1)
    double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1); safe as a log() argument
    double u01_open() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    // standard normal, Marsaglia polar method with one cached spare
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * u01() - 1.0;
            v = 2.0 * u01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    // exponential with the given mean; strictly positive
    double exponential(double mean) { return -mean * std::log(u01_open()); }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace shearchaos
