#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "hgr/baselines.hpp"
#include "test_helpers.hpp"

using namespace hgr;

TEST_CASE("identical inputs give near-perfect rdc") {
    const SampleVector a = testing::random_sample(200, 5);
    CHECK(rdc(a, a, RdcConfig(0)) >= 0.99);
}

TEST_CASE("rdc is deterministic given the seed") {
    const SampleVector a = testing::random_sample(150, 6);
    const SampleVector b = testing::random_sample(150, 7);
    const double first = rdc(a, b, RdcConfig(123));
    const double second = rdc(a, b, RdcConfig(123));
    CHECK(first == second);
}

TEST_CASE("rdc fluctuates across seeds") {
    const SampleVector a = testing::uniform_sample(200, 8);
    Eigen::VectorXd noisy(200);
    {
        Rng rng(9);
        for (int i = 0; i < 200; ++i)
            noisy(i) = a.values()(i) * a.values()(i) + 0.3 * rng.normal();
    }
    const SampleVector b{noisy};

    std::vector<double> values;
    for (std::uint64_t seed = 0; seed < 30; ++seed) values.push_back(rdc(a, b, RdcConfig(seed)));

    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());

    CHECK(std::sqrt(var) > 0.0);
    for (double v : values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("rank copula makes rdc exactly invariant to increasing maps") {
    const SampleVector a = testing::random_sample(120, 10);
    const SampleVector b = testing::random_sample(120, 11);
    Eigen::VectorXd warped = (a.values().array() * 0.5).exp() + 3.0;
    const SampleVector a_warped{warped};

    const double base = rdc(a, b, RdcConfig(42));
    const double mapped = rdc(a_warped, b, RdcConfig(42));
    CHECK(base == mapped);
}

TEST_CASE("rdc validates its configuration") {
    const SampleVector a = testing::random_sample(50, 12);
    const SampleVector b = testing::random_sample(50, 13);
    RdcConfig bad(0);
    bad.n_projections = 0;
    CHECK_THROWS_AS(rdc(a, b, bad), InputError);
    CHECK_THROWS_AS(rdc(a, testing::random_sample(51, 14), RdcConfig(0)), LengthMismatchError);
}
