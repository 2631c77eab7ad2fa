#pragma once

#include <cstdint>
#include <random>

namespace dtsync {

// splitmix64, used only to derive well-separated substream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    return mix64(mix64(base ^ mix64(a)) ^ mix64(b + 0x5851f42d4c957f2dULL));
}

// One independent random stream. Every source of randomness in a run is a
// RngStream derived from the experiment seed, so trials are reproducible
// and parallelizable.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0) : gen_(seed) {}

    double gaussian(double mean = 0.0, double stddev = 1.0) {
        return std::normal_distribution<double>(mean, stddev)(gen_);
    }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }

    std::uint64_t bits() { return gen_(); }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

}  // namespace dtsync
