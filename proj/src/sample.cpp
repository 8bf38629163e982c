#include "hgr/sample.hpp"

#include <cmath>

namespace hgr {

double mean_of(const Eigen::VectorXd& v) { return v.mean(); }

double stddev_of(const Eigen::VectorXd& v) {
    const double mu = v.mean();
    return std::sqrt((v.array() - mu).square().mean());
}

SampleVector::SampleVector(Eigen::VectorXd values, std::string name)
    : values_(std::move(values)), name_(std::move(name)) {
    if (values_.size() < 3)
        throw InputError("sample vector needs at least 3 observations, got " +
                         std::to_string(values_.size()));
    if (!values_.allFinite())
        throw NonNumericValueError("sample vector '" + name_ + "' contains NaN or Inf");
    mean_ = values_.mean();
    stddev_ = std::sqrt((values_.array() - mean_).square().mean());
    if (!(stddev_ > 0.0))
        throw ZeroVarianceError("sample vector '" + name_ + "' has zero variance");
}

}  // namespace hgr
