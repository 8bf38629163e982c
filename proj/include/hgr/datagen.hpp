#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "hgr/sample.hpp"

namespace hgr {

enum class Relation { Linear, Quadratic, Cubic, Circular, SinOfSquare };

Relation relation_from_string(const std::string& name);
std::string to_string(Relation r);

// A deterministic relationship plus Gaussian noise on the dependent
// coordinate(s); the circular relation gets isotropic noise on both.
struct SyntheticSpec {
    Relation relation = Relation::Linear;
    int n = 0;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    // Parses "relation:n=500:sigma=0.1[:seed=7]".
    static SyntheticSpec parse(const std::string& text);
    std::string to_string() const;
};

std::pair<SampleVector, SampleVector> generate(const SyntheticSpec& spec);

// Pearson correlation of the registered optimal transformation pair for the
// relation, e.g. (a^2, -b^2) for circular data. Equals 1 when the noise is 0.
double oracle_correlation(const SyntheticSpec& spec, const SampleVector& a, const SampleVector& b);

// Two-column CSV with header "a,b", full double precision, '.' decimal point.
std::string to_csv(const SampleVector& a, const SampleVector& b);

}  // namespace hgr
