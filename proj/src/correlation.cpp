#include "hgr/correlation.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hgr/rng.hpp"

namespace hgr {

namespace {

constexpr double kDegenerateVariance = 1e-14;
constexpr double kTieEps = 1e-12;

double correlation_of_centered(const Eigen::VectorXd& f, const Eigen::VectorXd& g, double sf,
                               double sg) {
    const double n = static_cast<double>(f.size());
    return f.dot(g) / (n * sf * sg);
}

// sqrt of the eigenvalue ratio of the column covariance; equals the singular
// value ratio of the centered matrix up to roundoff.
double condition_from_covariance(const Eigen::MatrixXd& centered) {
    const double n = static_cast<double>(centered.rows());
    Eigen::MatrixXd cov = centered.transpose() * centered / n;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues()(0);
    const double hi = eig.eigenvalues()(eig.eigenvalues().size() - 1);
    if (lo <= 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(hi / lo);
}

bool lexicographically_less(const Eigen::VectorXd& lhs, const Eigen::VectorXd& rhs) {
    for (Eigen::Index i = 0; i < lhs.size(); ++i) {
        if (lhs(i) < rhs(i)) return true;
        if (lhs(i) > rhs(i)) return false;
    }
    return false;
}

// Flips the pair jointly so the first entry of u with meaningful magnitude is
// positive. Joint flips leave the correlation unchanged.
void canonicalize_pair_sign(Eigen::VectorXd& u, Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (std::abs(u(i)) > kTieEps) {
            if (u(i) < 0.0) {
                u = -u;
                v = -v;
            }
            return;
        }
    }
}

struct RefinementOutcome {
    Eigen::VectorXd alpha;
    Eigen::VectorXd beta;
    int iterations = 0;
};

// Projected gradient descent on the variance-constrained residual problem:
// minimize (1/n)||Ka*alpha - Kb*beta||^2 with the beta-side projection held at
// unit variance by rescaling after each step. The step size comes from a
// Frobenius bound on the gradient Lipschitz constant.
RefinementOutcome refine_projected_gradient(const Eigen::MatrixXd& ka, const Eigen::MatrixXd& kb,
                                            const SolverConfig& cfg) {
    const double n = static_cast<double>(ka.rows());
    const Eigen::Index h = ka.cols();
    const Eigen::Index k = kb.cols();
    const double lipschitz = 2.0 * (ka.squaredNorm() + kb.squaredNorm()) / n;
    const double step = 1.0 / lipschitz;

    auto normalize_beta = [&](Eigen::VectorXd& beta) {
        const double sigma = stddev_of(kb * beta);
        if (sigma > kDegenerateVariance)
            beta /= sigma;
        else
            beta = Eigen::VectorXd::Constant(k, 1.0 / std::max(stddev_of(kb.rowwise().sum()), 1.0));
    };

    struct StartResult {
        Eigen::VectorXd alpha;
        Eigen::VectorXd beta;
        double rho = 0.0;
        int iterations = 0;
    };
    auto run_from = [&](Eigen::VectorXd alpha, Eigen::VectorXd beta) -> StartResult {
        normalize_beta(beta);
        double prev_rho = -2.0;
        int it = 0;
        for (; it < cfg.max_iter; ++it) {
            const Eigen::VectorXd residual = ka * alpha - kb * beta;
            const Eigen::VectorXd grad_alpha = (2.0 / n) * (ka.transpose() * residual);
            const Eigen::VectorXd grad_beta = (-2.0 / n) * (kb.transpose() * residual);
            alpha -= step * grad_alpha;
            beta -= step * grad_beta;
            normalize_beta(beta);

            const Eigen::VectorXd f = ka * alpha;
            const double sf = stddev_of(f);
            const double rho =
                sf > kDegenerateVariance ? std::abs(correlation_of_centered(f, kb * beta, sf, 1.0)) : 0.0;
            if (std::abs(rho - prev_rho) < cfg.tol) {
                prev_rho = rho;
                break;
            }
            prev_rho = rho;
        }
        return {std::move(alpha), std::move(beta), prev_rho, it};
    };

    RefinementOutcome best;
    double best_rho = -1.0;

    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> starts;
    if (cfg.warm_start.has_value() && cfg.warm_start->first.size() == h &&
        cfg.warm_start->second.size() == k) {
        starts.emplace_back(cfg.warm_start->first, cfg.warm_start->second);
    } else {
        // deterministic default: the linear solution direction
        Eigen::VectorXd a0 = Eigen::VectorXd::Zero(h);
        Eigen::VectorXd b0 = Eigen::VectorXd::Zero(k);
        a0(0) = 1.0;
        b0(0) = 1.0;
        starts.emplace_back(a0, b0);
    }
    Rng rng(cfg.restart_seed);
    for (int r = 1; r < std::max(1, cfg.restarts); ++r) {
        Eigen::VectorXd a0(h), b0(k);
        for (Eigen::Index i = 0; i < h; ++i) a0(i) = rng.normal();
        for (Eigen::Index i = 0; i < k; ++i) b0(i) = rng.normal();
        starts.emplace_back(a0, b0);
    }

    for (const auto& [a0, b0] : starts) {
        StartResult candidate = run_from(a0, b0);
        if (candidate.rho > best_rho) {
            best_rho = candidate.rho;
            best.alpha = std::move(candidate.alpha);
            best.beta = std::move(candidate.beta);
            best.iterations = candidate.iterations;
        }
    }
    return best;
}

// Shared finishing step: scale both coefficient vectors to unit projection
// variance, flip the sign so the correlation is non-negative, recompute the
// value from the actual projections, and fill diagnostics.
HgrResult finalize(const Eigen::MatrixXd& ka, const Eigen::MatrixXd& kb, Eigen::VectorXd alpha,
                   Eigen::VectorXd beta, int iterations, double cond_a, double cond_b,
                   bool rank_deficient) {
    HgrResult result;
    result.diagnostics.iterations = iterations;
    result.diagnostics.condition_a = cond_a;
    result.diagnostics.condition_b = cond_b;
    result.diagnostics.rank_deficient = rank_deficient;

    Eigen::VectorXd f = ka * alpha;
    Eigen::VectorXd g = kb * beta;
    const double sf = stddev_of(f);
    const double sg = stddev_of(g);
    if (sf < kDegenerateVariance || sg < kDegenerateVariance) {
        result.value = 0.0;
        result.alpha = std::move(alpha);
        result.beta = std::move(beta);
        result.diagnostics.degenerate = true;
        result.diagnostics.final_residual = 1.0;
        return result;
    }
    alpha /= sf;
    beta /= sg;
    f /= sf;
    g /= sg;

    double rho = correlation_of_centered(f, g, 1.0, 1.0);
    if (rho < 0.0) {
        alpha = -alpha;
        f = -f;
        rho = -rho;
    } else if (rho == 0.0) {
        Eigen::VectorXd dummy = beta;
        canonicalize_pair_sign(alpha, dummy);
    }
    rho = std::min(rho, 1.0);

    result.value = rho;
    result.alpha = std::move(alpha);
    result.beta = std::move(beta);
    result.diagnostics.final_residual = (rho * f - g).squaredNorm() / static_cast<double>(f.size());
    return result;
}

}  // namespace

CcaResult leading_canonical_pair(const Eigen::MatrixXd& centered_a,
                                 const Eigen::MatrixXd& centered_b, double relative_ridge) {
    if (centered_a.rows() != centered_b.rows())
        throw LengthMismatchError("feature matrices differ in row count");
    const double n = static_cast<double>(centered_a.rows());
    const Eigen::Index p = centered_a.cols();
    const Eigen::Index q = centered_b.cols();

    Eigen::MatrixXd cov_a = centered_a.transpose() * centered_a / n;
    Eigen::MatrixXd cov_b = centered_b.transpose() * centered_b / n;
    const Eigen::MatrixXd cov_ab = centered_a.transpose() * centered_b / n;

    const double ridge_a =
        relative_ridge * (cov_a.trace() > 0.0 ? cov_a.trace() / static_cast<double>(p) : 1.0);
    const double ridge_b =
        relative_ridge * (cov_b.trace() > 0.0 ? cov_b.trace() / static_cast<double>(q) : 1.0);
    cov_a.diagonal().array() += ridge_a;
    cov_b.diagonal().array() += ridge_b;

    CcaResult out;

    auto inverse_sqrt = [](const Eigen::MatrixXd& cov, double ridge, double* condition,
                           bool* deficient) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
        const Eigen::VectorXd& lam = eig.eigenvalues();  // ascending
        const double hi = lam(lam.size() - 1);
        const double lo_unridged = lam(0) - ridge;
        *deficient = *deficient || lo_unridged <= hi * 1e-12;
        *condition = lo_unridged > 0.0 ? std::sqrt(hi / lo_unridged)
                                       : std::numeric_limits<double>::infinity();
        Eigen::VectorXd inv_sqrt =
            lam.array().max(std::numeric_limits<double>::min()).rsqrt();
        return Eigen::MatrixXd(eig.eigenvectors() * inv_sqrt.asDiagonal() *
                               eig.eigenvectors().transpose());
    };

    const Eigen::MatrixXd white_a = inverse_sqrt(cov_a, ridge_a, &out.condition_a, &out.rank_deficient);
    const Eigen::MatrixXd white_b = inverse_sqrt(cov_b, ridge_b, &out.condition_b, &out.rank_deficient);

    const Eigen::MatrixXd m = white_a * cov_ab * white_b;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();

    // Near-equal leading singular values are broken deterministically: among
    // the tied triples, keep the one whose mapped coefficient vector is
    // lexicographically largest after sign canonicalization.
    int best = 0;
    Eigen::VectorXd best_u = white_a * svd.matrixU().col(0);
    Eigen::VectorXd best_v = white_b * svd.matrixV().col(0);
    canonicalize_pair_sign(best_u, best_v);
    for (int i = 1; i < sv.size() && sv(0) - sv(i) <= kTieEps; ++i) {
        Eigen::VectorXd u = white_a * svd.matrixU().col(i);
        Eigen::VectorXd v = white_b * svd.matrixV().col(i);
        canonicalize_pair_sign(u, v);
        if (lexicographically_less(best_u, u)) {
            best = i;
            best_u = std::move(u);
            best_v = std::move(v);
        }
    }

    out.rho = std::clamp(sv(best), 0.0, 1.0);
    out.u = std::move(best_u);
    out.v = std::move(best_v);
    return out;
}

double pearson(const SampleVector& a, const SampleVector& b) {
    require_same_length(a, b);
    const double n = static_cast<double>(a.size());
    const double cov =
        (a.values().array() - a.mean()).cwiseProduct(b.values().array() - b.mean()).sum() / n;
    return std::clamp(cov / (a.stddev() * b.stddev()), -1.0, 1.0);
}

double pearson_lstsq(const SampleVector& a, const SampleVector& b) {
    require_same_length(a, b);
    // Normal equation of min_r ||a_std * r - b_std||^2.
    const Eigen::VectorXd as = a.standardized();
    const Eigen::VectorXd bs = b.standardized();
    return as.dot(bs) / as.dot(as);
}

HgrResult hgr_kb(const SampleVector& a, const SampleVector& b, const DegreeConfig& deg,
                 const SolverConfig& cfg) {
    require_same_length(a, b);
    if (deg.h < 1 || deg.k < 1) throw InvalidDegreeError();
    if (a.size() <= deg.h || b.size() <= deg.k)
        throw InputError("need more observations than kernel coefficients");

    const KernelMatrix ka = expand(a, deg.h);
    const KernelMatrix kb = expand(b, deg.k);

    if (cfg.algorithm == SolverAlgorithm::WhitenedSvd) {
        CcaResult cca = leading_canonical_pair(ka.centered, kb.centered, cfg.ridge);
        return finalize(ka.centered, kb.centered, cca.u, cca.v, 0, cca.condition_a,
                        cca.condition_b, cca.rank_deficient);
    }

    RefinementOutcome refined = refine_projected_gradient(ka.centered, kb.centered, cfg);
    const double cond_a = condition_from_covariance(ka.centered);
    const double cond_b = condition_from_covariance(kb.centered);
    const bool deficient = !std::isfinite(cond_a) || !std::isfinite(cond_b) || cond_a > 1e6 ||
                           cond_b > 1e6;
    return finalize(ka.centered, kb.centered, refined.alpha, refined.beta, refined.iterations,
                    cond_a, cond_b, deficient);
}

HgrResult hgr_sk(const SampleVector& a, const SampleVector& b, int degree,
                 const SolverConfig& cfg) {
    (void)cfg;  // the least-squares path has no tunables
    require_same_length(a, b);
    if (degree < 1) throw InvalidDegreeError();
    if (a.size() <= degree)
        throw InputError("need more observations than kernel coefficients");

    const KernelMatrix ka = expand(a, degree);
    const KernelMatrix kb = expand(b, degree);
    const Eigen::VectorXd a_std = a.standardized();
    const Eigen::VectorXd b_std = b.standardized();

    struct Fit {
        Eigen::VectorXd coeffs;
        double rho = 0.0;
        bool degenerate = false;
    };
    auto fit_onto = [](const Eigen::MatrixXd& basis, const Eigen::VectorXd& target) {
        Fit fit;
        fit.coeffs = basis.colPivHouseholderQr().solve(target);
        const Eigen::VectorXd projected = basis * fit.coeffs;
        const double sigma = stddev_of(projected);
        if (sigma < kDegenerateVariance) {
            fit.degenerate = true;
            return fit;
        }
        fit.rho = std::abs(correlation_of_centered(projected, target, sigma, 1.0));
        return fit;
    };

    const Fit forward = fit_onto(ka.centered, b_std);   // kernel of a onto standardized b
    const Fit backward = fit_onto(kb.centered, a_std);  // kernel of b onto standardized a

    // Ties go to the a-to-b direction.
    const bool forward_wins = forward.rho >= backward.rho - kTieEps;

    const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
    HgrResult result;
    if (forward_wins) {
        result = finalize(ka.centered, b_std, forward.coeffs, one, 0,
                          condition_from_covariance(ka.centered), 1.0, forward.degenerate);
        result.direction = Direction::AToB;
    } else {
        result = finalize(a_std, kb.centered, one, backward.coeffs, 0, 1.0,
                          condition_from_covariance(kb.centered), backward.degenerate);
        result.direction = Direction::BToA;
    }
    return result;
}

Eigen::MatrixXd degree_scan(const SampleVector& a, const SampleVector& b, int h_max, int k_max,
                            const SolverConfig& cfg) {
    if (h_max < 1 || k_max < 1) throw InvalidDegreeError();
    Eigen::MatrixXd grid(h_max, k_max);
    SolverConfig cell_cfg = cfg;
    for (int h = 1; h <= h_max; ++h) {
        for (int k = 1; k <= k_max; ++k) {
            HgrResult cell = hgr_kb(a, b, DegreeConfig{h, k}, cell_cfg);
            grid(h - 1, k - 1) = cell.value;
            // Carry coefficients into the successor cell, zero-padding the
            // degree that grows; nullified higher degrees reproduce the
            // current optimum as a starting point.
            if (k < k_max) {
                Eigen::VectorXd warm_beta = Eigen::VectorXd::Zero(k + 1);
                warm_beta.head(k) = cell.beta;
                cell_cfg.warm_start = std::make_pair(cell.alpha, std::move(warm_beta));
            } else if (h < h_max) {
                Eigen::VectorXd warm_alpha = Eigen::VectorXd::Zero(h + 1);
                warm_alpha.head(h) = cell.alpha;
                cell_cfg.warm_start =
                    std::make_pair(std::move(warm_alpha), Eigen::VectorXd::Constant(1, cell.beta(0)));
            }
        }
    }
    return grid;
}

}  // namespace hgr
