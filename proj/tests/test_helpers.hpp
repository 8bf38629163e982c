#pragma once

#include <Eigen/Dense>

#include "hgr/rng.hpp"
#include "hgr/sample.hpp"

namespace hgr::testing {

inline SampleVector random_sample(int n, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.normal();
    return SampleVector(std::move(v));
}

inline SampleVector uniform_sample(int n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Rng rng(seed);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
    return SampleVector(std::move(v));
}

}  // namespace hgr::testing
