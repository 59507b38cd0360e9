#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sclm {

// splitmix64; used to derive independent per-task seeds from a master seed.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t task_id) {
    return splitmix64(master ^ splitmix64(task_id + 0x517cc1b727220a95ULL));
}

// Uniform in [0,1) with a fully specified bit pattern, so trajectories are
// reproducible across standard library implementations.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller; consumes exactly two draws.
inline double normal(std::mt19937_64& rng, double mean, double stddev) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    return mean + stddev * z;
}

}  // namespace sclm
