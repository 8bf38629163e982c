#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>

#include "hgr/kernelspace.hpp"
#include "hgr/sample.hpp"

namespace hgr {

struct DegreeConfig {
    int h = 1;  // kernel degree for the first sample
    int k = 1;  // kernel degree for the second sample
};

enum class SolverAlgorithm {
    WhitenedSvd,        // direct eigen solve: whiten both bases, leading singular triple
    ProjectedGradient,  // iterative refinement on the variance-constrained residual problem
};

struct SolverConfig {
    double ridge = 1e-9;    // diagonal stabilizer, relative to trace(C)/d
    double tol = 1e-8;      // refinement convergence tolerance on the correlation value
    int max_iter = 500;     // refinement iteration cap per start
    SolverAlgorithm algorithm = SolverAlgorithm::WhitenedSvd;
    int restarts = 8;       // random restarts for the refinement path (first start is warm/deterministic)
    std::uint64_t restart_seed = 0;
    // Coefficients carried from a previous solve; consumed by the refinement
    // path as its first starting point, ignored by the direct solve.
    std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> warm_start;
};

enum class Direction { Both, AToB, BToA };

struct SolverDiagnostics {
    int iterations = 0;           // refinement iterations of the winning start; 0 for the direct solve
    double final_residual = 0.0;  // mean squared residual of the standardized projections, equals 1 - value^2 at the optimum
    double condition_a = 0.0;     // singular value ratio of the centered kernel of a
    double condition_b = 0.0;
    bool rank_deficient = false;  // near-dependent kernel columns were stabilized by the ridge
    bool degenerate = false;      // a projection had no variance; value reported as 0
};

struct HgrResult {
    double value = 0.0;           // in [0, 1]
    Eigen::VectorXd alpha;        // coefficients for a, scaled to unit projection variance
    Eigen::VectorXd beta;         // coefficients for b, scaled to unit projection variance
    Direction direction = Direction::Both;
    SolverDiagnostics diagnostics;
};

// Sample Pearson correlation, direct covariance formula.
double pearson(const SampleVector& a, const SampleVector& b);

// Pearson obtained as the closed-form minimizer of the standardized
// least-squares problem; agrees with pearson() to roundoff.
double pearson_lstsq(const SampleVector& a, const SampleVector& b);

// Maximal correlation over degree-h polynomial transforms of a and degree-k
// transforms of b. The default solver whitens both centered kernel bases and
// takes the leading singular triple of the whitened cross-covariance, which
// reaches the global optimum deterministically.
HgrResult hgr_kb(const SampleVector& a, const SampleVector& b, const DegreeConfig& deg,
                 const SolverConfig& cfg = {});

// Single-kernel restriction: fits a degree-d kernel of one side onto the
// standardized other side by plain least squares, in both directions, and
// keeps the larger correlation.
HgrResult hgr_sk(const SampleVector& a, const SampleVector& b, int degree,
                 const SolverConfig& cfg = {});

// Grid of hgr_kb values for all degree pairs up to (h_max, k_max); cell (i, j)
// zero-based holds degrees (i+1, j+1). Coefficients from each solved cell are
// carried into the next call's warm start.
Eigen::MatrixXd degree_scan(const SampleVector& a, const SampleVector& b, int h_max, int k_max,
                            const SolverConfig& cfg = {});

// First canonical correlation between two centered feature matrices: the
// shared numerical core behind hgr_kb and the RDC baseline. Covariances are
// ridge-stabilized, whitened by symmetric inverse square roots, and the
// leading singular triple of the whitened cross-covariance is mapped back to
// coefficient space.
struct CcaResult {
    double rho = 0.0;
    Eigen::VectorXd u;  // coefficients for the first feature set
    Eigen::VectorXd v;  // coefficients for the second feature set
    double condition_a = 0.0;
    double condition_b = 0.0;
    bool rank_deficient = false;
};
CcaResult leading_canonical_pair(const Eigen::MatrixXd& centered_a, const Eigen::MatrixXd& centered_b,
                                 double relative_ridge);

}  // namespace hgr
