#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>

#include "hgr/errors.hpp"

namespace hgr {

// Central moments used throughout: mean and the population standard deviation
// (divide by n). All correlation formulas in this library share that
// convention; it cancels in every correlation ratio.
double mean_of(const Eigen::VectorXd& v);
double stddev_of(const Eigen::VectorXd& v);

// A validated column of observations. Construction rejects anything the
// numerical layers cannot handle: fewer than 3 entries, non-finite values,
// or zero spread.
class SampleVector {
public:
    explicit SampleVector(Eigen::VectorXd values, std::string name = "");

    const Eigen::VectorXd& values() const { return values_; }
    const std::string& name() const { return name_; }
    Eigen::Index size() const { return values_.size(); }
    double mean() const { return mean_; }
    double stddev() const { return stddev_; }

    // Zero mean, unit (population) variance copy.
    Eigen::VectorXd standardized() const { return (values_.array() - mean_) / stddev_; }

private:
    Eigen::VectorXd values_;
    std::string name_;
    double mean_ = 0.0;
    double stddev_ = 0.0;
};

inline void require_same_length(const SampleVector& a, const SampleVector& b) {
    if (a.size() != b.size())
        throw LengthMismatchError("sample vectors differ in length: " + std::to_string(a.size()) +
                                  " vs " + std::to_string(b.size()));
}

}  // namespace hgr
