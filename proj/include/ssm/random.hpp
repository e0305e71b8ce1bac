#pragma once
//
// Seeded generators for test inputs and systems. mt19937_64 is fully
// specified by the standard and the mapping to doubles is done here, so a
// given seed yields identical values on every platform.
//

#include <cstdint>
#include <random>

#include "ssm/lti.hpp"
#include "ssm/signal.hpp"

namespace ssm {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
    std::uint64_t next() { return engine_(); }
    // Uniform integer in [lo, hi].
    std::size_t index(std::size_t lo, std::size_t hi) { return lo + static_cast<std::size_t>(engine_() % (hi - lo + 1)); }

private:
    std::mt19937_64 engine_;
};

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0, double hi = 1.0);

// Entries uniform in [-1, 1].
SignalBlock random_signal(std::size_t dim, std::size_t length, std::uint64_t seed);

// Random dense system whose Abar has spectral norm exactly sigma_max
// (uniform entries, rescaled). B, C, D uniform in [-1, 1].
DiscreteLti random_stable_system(std::size_t m, std::size_t p, std::size_t q, double sigma_max, Rng& rng);

// Bilinear discretisation of the HiPPO matrix wrapped with averaging_siso.
DiscreteLti hippo_system(std::size_t m, double delta);

}  // namespace ssm
