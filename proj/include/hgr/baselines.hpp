#pragma once

#include <cstdint>

#include "hgr/sample.hpp"

namespace hgr {

// Randomized Dependence Coefficient parameters. The seed is mandatory: every
// randomized draw in the library is explicitly seeded.
struct RdcConfig {
    int n_projections = 20;
    double scale = 1.0 / 6.0;  // amplitude of the random projection weights
    std::uint64_t seed;

    explicit RdcConfig(std::uint64_t seed_) : seed(seed_) {}
};

// Rank-copula transform of each input, a bank of random sinusoidal features on
// each, and the first canonical correlation between the two feature sets.
double rdc(const SampleVector& a, const SampleVector& b, const RdcConfig& cfg);

}  // namespace hgr
