#include "hgr/kernelspace.hpp"

#include <Eigen/SVD>
#include <limits>

namespace hgr {

namespace {

// Powers by iterated elementwise multiplication: exact for negative inputs
// and reproducible across libm implementations.
Eigen::MatrixXd power_columns(const Eigen::VectorXd& x, int degree) {
    const Eigen::Index n = x.size();
    Eigen::MatrixXd powers(n, degree);
    powers.col(0) = x;
    for (int j = 1; j < degree; ++j)
        powers.col(j) = powers.col(j - 1).cwiseProduct(x);
    return powers;
}

KernelMatrix build(const Eigen::VectorXd& transformed, int degree, double source_mean,
                   double source_std, bool standardized) {
    KernelMatrix k;
    k.degree = degree;
    k.source_mean = source_mean;
    k.source_std = source_std;
    k.standardized = standardized;
    k.raw = power_columns(transformed, degree);
    k.column_means = k.raw.colwise().mean();
    k.centered = k.raw.rowwise() - k.column_means.transpose();
    return k;
}

}  // namespace

double KernelMatrix::condition_number() const {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
    const auto& sv = svd.singularValues();
    const double smallest = sv(sv.size() - 1);
    if (smallest <= 0.0) return std::numeric_limits<double>::infinity();
    return sv(0) / smallest;
}

Eigen::MatrixXd KernelMatrix::apply(const Eigen::VectorXd& x) const {
    if (!x.allFinite()) throw NonNumericValueError("kernel input contains NaN or Inf");
    Eigen::VectorXd transformed =
        standardized ? Eigen::VectorXd((x.array() - source_mean) / source_std) : x;
    Eigen::MatrixXd powers = power_columns(transformed, degree);
    return powers.rowwise() - column_means.transpose();
}

KernelMatrix expand_raw(const Eigen::VectorXd& x, int degree) {
    if (degree < 1) throw InvalidDegreeError();
    if (!x.allFinite()) throw NonNumericValueError("kernel input contains NaN or Inf");
    return build(x, degree, 0.0, 1.0, false);
}

KernelMatrix expand(const SampleVector& x, int degree) {
    if (degree < 1) throw InvalidDegreeError();
    return build(x.standardized(), degree, x.mean(), x.stddev(), true);
}

Eigen::VectorXd project(const KernelMatrix& kernel, const Eigen::VectorXd& omega) {
    if (omega.size() != kernel.degree)
        throw DimensionMismatchError("coefficient length " + std::to_string(omega.size()) +
                                     " does not match kernel degree " +
                                     std::to_string(kernel.degree));
    return kernel.centered * omega;
}

}  // namespace hgr
