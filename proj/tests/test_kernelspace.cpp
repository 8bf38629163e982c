#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "hgr/kernelspace.hpp"
#include "test_helpers.hpp"

using namespace hgr;

TEST_CASE("raw expansion lays out powers column by column") {
    Eigen::VectorXd x(2);
    x << 1.0, 2.0;
    const KernelMatrix k = expand_raw(x, 2);

    CHECK(k.raw(0, 0) == 1.0);
    CHECK(k.raw(0, 1) == 1.0);
    CHECK(k.raw(1, 0) == 2.0);
    CHECK(k.raw(1, 1) == 4.0);

    CHECK(k.centered(0, 0) == doctest::Approx(-0.5));
    CHECK(k.centered(0, 1) == doctest::Approx(-1.5));
    CHECK(k.centered(1, 0) == doctest::Approx(0.5));
    CHECK(k.centered(1, 1) == doctest::Approx(1.5));
    CHECK(k.raw.rows() == k.centered.rows());
    CHECK(k.raw.cols() == k.centered.cols());
}

TEST_CASE("constant input is rejected") {
    Eigen::VectorXd c = Eigen::VectorXd::Constant(5, 3.25);
    CHECK_THROWS_AS(SampleVector{c}, ZeroVarianceError);
}

TEST_CASE("degree must be at least one") {
    const SampleVector x = testing::uniform_sample(20, 1);
    CHECK_THROWS_AS(expand(x, 0), InvalidDegreeError);
    CHECK_THROWS_AS(expand(x, -2), InvalidDegreeError);
}

TEST_CASE("centered columns sum to zero") {
    const int n = 200;
    const SampleVector x = testing::uniform_sample(n, 42);
    const KernelMatrix k = expand(x, 5);
    for (int j = 0; j < 5; ++j)
        CHECK(std::abs(k.centered.col(j).sum()) <= 1e-9 * n);
}

TEST_CASE("raw powers of the standardized input") {
    const SampleVector x = testing::uniform_sample(50, 7);
    const Eigen::VectorXd z = x.standardized();
    const KernelMatrix k = expand(x, 4);
    for (int j = 1; j <= 4; ++j)
        CHECK((k.raw.col(j - 1) - z.array().pow(j).matrix()).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("projection basics") {
    const SampleVector x = testing::uniform_sample(30, 3);
    const KernelMatrix k = expand(x, 4);

    CHECK(project(k, Eigen::VectorXd::Zero(4)).isZero(0.0));

    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(4);
    e1(0) = 1.0;
    CHECK((project(k, e1) - k.centered.col(0)).norm() == 0.0);

    Eigen::VectorXd omega(4);
    omega << 0.3, -1.2, 0.05, 2.0;
    CHECK((project(k, 2.0 * omega) - 2.0 * project(k, omega)).lpNorm<Eigen::Infinity>() < 1e-12);

    CHECK_THROWS_AS(project(k, Eigen::VectorXd::Zero(3)), DimensionMismatchError);
}

TEST_CASE("affine maps of the input span the same centered column space") {
    const int n = 60;
    const SampleVector x = testing::uniform_sample(n, 11);
    Eigen::VectorXd shifted = 2.5 * x.values().array() - 7.0;
    const SampleVector y{shifted};

    for (int d = 1; d <= 6; ++d) {
        const KernelMatrix kx = expand(x, d);
        const KernelMatrix ky = expand(y, d);
        // every centered column of ky must be reproducible from kx's columns
        for (int j = 0; j < d; ++j) {
            const Eigen::VectorXd target = ky.centered.col(j);
            const Eigen::VectorXd fitted =
                kx.centered * kx.centered.colPivHouseholderQr().solve(target);
            CHECK((fitted - target).norm() <= 1e-8 * std::max(1.0, target.norm()));
        }
    }
}

TEST_CASE("condition number stays finite for standardized inputs") {
    const SampleVector x = testing::random_sample(300, 19);
    for (int d = 1; d <= 8; ++d) {
        const KernelMatrix k = expand(x, d);
        CHECK(std::isfinite(k.condition_number()));
    }
}

TEST_CASE("apply replays training standardization and centering") {
    const SampleVector x = testing::uniform_sample(40, 23);
    const KernelMatrix k = expand(x, 3);

    // on the training points the transform reproduces the centered matrix
    CHECK((k.apply(x.values()) - k.centered).lpNorm<Eigen::Infinity>() < 1e-12);

    // held-out points reuse the training column means, so a constant input
    // maps to a nonzero row in general
    Eigen::VectorXd probe = Eigen::VectorXd::Constant(5, x.mean());
    const Eigen::MatrixXd mapped = k.apply(probe);
    CHECK(mapped.rows() == 5);
    CHECK(mapped.cols() == 3);
    for (int j = 0; j < 3; ++j)
        CHECK(mapped(0, j) == doctest::Approx(-k.column_means(j)).epsilon(1e-12));
}
