#include "hgr/baselines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hgr/correlation.hpp"
#include "hgr/rng.hpp"

namespace hgr {

namespace {

// Sinusoidal feature covariances decay quickly, so the CCA step needs a
// heavier stabilizer than the polynomial solver to keep noise directions from
// reporting spurious correlation.
constexpr double kRdcRidge = 1e-6;

// Empirical copula: average rank / n, in (0, 1]. Average ranks keep the
// transform exactly invariant under strictly increasing maps, ties included.
Eigen::VectorXd rank_copula(const Eigen::VectorXd& x) {
    const Eigen::Index n = x.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int lhs, int rhs) { return x(lhs) < x(rhs); });

    Eigen::VectorXd copula(n);
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        while (j + 1 < n && x(order[j + 1]) == x(order[i])) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
        for (Eigen::Index t = i; t <= j; ++t) copula(order[t]) = avg_rank / static_cast<double>(n);
        i = j + 1;
    }
    return copula;
}

// sin(W * [copula, 1]) feature bank with seeded Gaussian weights.
Eigen::MatrixXd sinusoidal_features(const Eigen::VectorXd& copula, int k, double scale, Rng& rng) {
    const Eigen::Index n = copula.size();
    Eigen::MatrixXd features(n, k);
    for (int j = 0; j < k; ++j) {
        const double weight = scale * rng.normal();
        const double bias = scale * rng.normal();
        features.col(j) = (weight * copula.array() + bias).sin();
    }
    return features;
}

}  // namespace

double rdc(const SampleVector& a, const SampleVector& b, const RdcConfig& cfg) {
    require_same_length(a, b);
    if (cfg.n_projections < 1) throw InputError("rdc needs at least one projection");

    Rng rng(cfg.seed);
    const Eigen::VectorXd copula_a = rank_copula(a.values());
    const Eigen::VectorXd copula_b = rank_copula(b.values());
    Eigen::MatrixXd feat_a = sinusoidal_features(copula_a, cfg.n_projections, cfg.scale, rng);
    Eigen::MatrixXd feat_b = sinusoidal_features(copula_b, cfg.n_projections, cfg.scale, rng);

    feat_a.rowwise() -= feat_a.colwise().mean();
    feat_b.rowwise() -= feat_b.colwise().mean();

    return leading_canonical_pair(feat_a, feat_b, kRdcRidge).rho;
}

}  // namespace hgr
