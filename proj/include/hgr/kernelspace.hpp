#pragma once

#include <Eigen/Dense>

#include "hgr/sample.hpp"

namespace hgr {

// Polynomial feature expansion of one vector: column j holds the elementwise
// j-th power of the (optionally standardized) source, j = 1..degree. The
// centered variant has column means removed. Input statistics are kept so the
// same transform can be replayed on held-out points.
struct KernelMatrix {
    Eigen::MatrixXd raw;            // n x d, powers of the transformed source
    Eigen::MatrixXd centered;       // raw with column means subtracted
    Eigen::VectorXd column_means;   // d
    int degree = 0;
    double source_mean = 0.0;       // mean of the original input
    double source_std = 1.0;        // population stddev of the original input
    bool standardized = false;      // whether powers were taken of the z-scored input

    // Ratio of largest to smallest singular value of the centered matrix.
    double condition_number() const;

    // Re-applies the stored transform (standardization followed by powers and
    // training-set centering) to new observations.
    Eigen::MatrixXd apply(const Eigen::VectorXd& x) const;
};

// Expansion of a raw vector without standardization. Exposed for callers that
// manage their own scaling; requires finite entries and d >= 1.
KernelMatrix expand_raw(const Eigen::VectorXd& x, int degree);

// Standard entry point: standardizes the input to zero mean and unit variance
// before taking powers, which keeps x^d in range for high degrees.
KernelMatrix expand(const SampleVector& x, int degree);

// centered * omega; omega must have length degree.
Eigen::VectorXd project(const KernelMatrix& kernel, const Eigen::VectorXd& omega);

}  // namespace hgr
