#pragma once

#include <Eigen/Dense>
#include <functional>

#include "hgr/correlation.hpp"

namespace hgr {

struct GradientResult {
    Eigen::VectorXd gradient;        // d value / d b_i, length n
    double value = 0.0;              // indicator value at the evaluation point
    Eigen::VectorXd frozen_alpha;    // coefficients at which the envelope derivative was taken
    Eigen::VectorXd frozen_beta;
    Direction direction = Direction::Both;
};

// Envelope gradient of hgr_kb with respect to b: solves for the optimal
// coefficients, freezes them, and differentiates the correlation of the two
// projections through b's standardization, powers, and centering. Valid as a
// subgradient wherever the optimum is non-unique.
GradientResult hgr_kb_subgradient(const SampleVector& a, const SampleVector& b,
                                  const DegreeConfig& deg, const SolverConfig& cfg = {});

// Same construction applied to the winning direction of hgr_sk. At a direction
// tie the returned gradient is that of the active branch.
GradientResult hgr_sk_gradient(const SampleVector& a, const SampleVector& b, int degree,
                               const SolverConfig& cfg = {});

// Central-difference check of an analytic gradient. Returns the max relative
// error over entries where either gradient exceeds 1e-7 in magnitude.
double finite_diff_check(const std::function<double(const Eigen::VectorXd&)>& fn,
                         const Eigen::VectorXd& b, const Eigen::VectorXd& analytic_gradient,
                         double step);

}  // namespace hgr
