#include "hgr/fairtrain.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include "hgr/gradients.hpp"
#include "hgr/rng.hpp"

namespace hgr {

namespace {

constexpr double kTinyVariance = 1e-12;

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream stream(line);
    std::string cell;
    while (std::getline(stream, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_number(const std::string& cell, const std::string& column) {
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw NonNumericValueError("column '" + column + "' has non-numeric value '" + cell + "'");
    }
}

void standardize_column(Eigen::Ref<Eigen::VectorXd> col, const std::string& name) {
    const double mu = col.mean();
    const double sigma = std::sqrt((col.array() - mu).square().mean());
    if (!(sigma > 0.0))
        throw ZeroVarianceError("continuous column '" + name + "' is constant");
    col = (col.array() - mu) / sigma;
}

Eigen::VectorXd normalize_target(Eigen::VectorXd y) {
    const double lo = y.minCoeff();
    const double hi = y.maxCoeff();
    if (!(hi > lo)) throw ZeroVarianceError("target column is constant");
    return (y.array() - lo) / (hi - lo);
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
    const double ss_res = (y - yhat).squaredNorm();
    const double ss_tot = (y.array() - y.mean()).square().sum();
    if (ss_tot <= 0.0) return 0.0;
    return 1.0 - ss_res / ss_tot;
}

// Rank-based AUC with average ranks on ties.
double auc(const Eigen::VectorXd& y, const Eigen::VectorXd& scores) {
    const Eigen::Index n = y.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int lhs, int rhs) { return scores(lhs) < scores(rhs); });
    Eigen::VectorXd ranks(n);
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        while (j + 1 < n && scores(order[j + 1]) == scores(order[i])) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (Eigen::Index t = i; t <= j; ++t) ranks(order[t]) = avg;
        i = j + 1;
    }
    double pos_rank_sum = 0.0;
    Eigen::Index n_pos = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        if (y(t) > 0.5) {
            pos_rank_sum += ranks(t);
            ++n_pos;
        }
    }
    const Eigen::Index n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) return 0.5;
    return (pos_rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double score_of(Task task, const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
    return task == Task::Regression ? r_squared(y, yhat) : auc(y, yhat);
}

struct Forward {
    std::vector<Eigen::MatrixXd> activations;  // activations[0] = inputs
    Eigen::VectorXd predictions;
};

Forward forward_pass(const ModelState& state, const Eigen::MatrixXd& features) {
    Forward fw;
    fw.activations.push_back(features);
    Eigen::MatrixXd current = features;
    const std::size_t n_layers = state.weights.size();
    for (std::size_t l = 0; l < n_layers; ++l) {
        Eigen::MatrixXd pre =
            (current * state.weights[l].transpose()).rowwise() + state.biases[l].transpose();
        if (l + 1 < n_layers) {
            current = pre.unaryExpr([](double v) { return relu(v); });
            fw.activations.push_back(current);
        } else {
            // Output stays pre-activation; the logistic map for binary tasks is
            // applied where needed so the loss gradient stays in logit space.
            fw.activations.push_back(pre);
            current = pre;
        }
    }
    Eigen::VectorXd out = current.col(0);
    if (state.task == Task::Binary)
        out = out.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    fw.predictions = std::move(out);
    return fw;
}

}  // namespace

Dataset Dataset::subset(const std::vector<int>& row_indices) const {
    Dataset out;
    out.feature_names = feature_names;
    out.feature_kinds = feature_kinds;
    out.features.resize(static_cast<Eigen::Index>(row_indices.size()), features.cols());
    out.target.resize(static_cast<Eigen::Index>(row_indices.size()));
    out.protected_attr.resize(static_cast<Eigen::Index>(row_indices.size()));
    for (std::size_t i = 0; i < row_indices.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = features.row(row_indices[i]);
        out.target(static_cast<Eigen::Index>(i)) = target(row_indices[i]);
        out.protected_attr(static_cast<Eigen::Index>(i)) = protected_attr(row_indices[i]);
    }
    return out;
}

Dataset load_csv(const std::string& path, const DatasetSchema& schema) {
    std::ifstream file(path);
    if (!file.is_open()) throw InputError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(file, line)) throw EmptyDatasetError("'" + path + "' is empty");
    const std::vector<std::string> header = split_line(line);

    std::vector<std::vector<std::string>> rows;
    while (std::getline(file, line)) {
        if (trim(line).empty()) continue;
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw InputError("row " + std::to_string(rows.size() + 2) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) throw EmptyDatasetError("'" + path + "' has a header but no rows");
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());

    auto column_index = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        throw MissingColumnError("column '" + name + "' not found in '" + path + "'");
    };

    const int target_idx = column_index(schema.target);
    const int protected_idx = column_index(schema.protected_attr);
    std::set<int> categorical_idx;
    for (const auto& name : schema.categorical) categorical_idx.insert(column_index(name));
    if (categorical_idx.count(target_idx) || categorical_idx.count(protected_idx))
        throw InputError("target and protected columns must be continuous");

    Dataset out;
    Eigen::VectorXd target(n);
    for (Eigen::Index r = 0; r < n; ++r)
        target(r) = parse_number(rows[r][target_idx], schema.target);
    out.target = normalize_target(std::move(target));

    out.protected_attr.resize(n);
    for (Eigen::Index r = 0; r < n; ++r)
        out.protected_attr(r) = parse_number(rows[r][protected_idx], schema.protected_attr);

    // Feature columns: everything except the target, in header order.
    // Continuous columns are standardized; categorical columns expand to one
    // indicator per level, levels sorted for a reproducible layout.
    std::vector<Eigen::VectorXd> columns;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (static_cast<int>(c) == target_idx) continue;
        if (categorical_idx.count(static_cast<int>(c))) {
            std::map<std::string, int> levels;
            for (const auto& row : rows) levels.emplace(row[c], 0);
            int next = 0;
            for (auto& [level, idx] : levels) idx = next++;
            std::vector<Eigen::VectorXd> indicators(levels.size(), Eigen::VectorXd::Zero(n));
            for (Eigen::Index r = 0; r < n; ++r) indicators[levels[rows[r][c]]](r) = 1.0;
            for (const auto& [level, idx] : levels) {
                out.feature_names.push_back(header[c] + "=" + level);
                out.feature_kinds.push_back(ColumnKind::Categorical);
                columns.push_back(indicators[idx]);
            }
        } else {
            Eigen::VectorXd col(n);
            for (Eigen::Index r = 0; r < n; ++r) col(r) = parse_number(rows[r][c], header[c]);
            standardize_column(col, header[c]);
            out.feature_names.push_back(header[c]);
            out.feature_kinds.push_back(ColumnKind::Continuous);
            columns.push_back(std::move(col));
        }
    }

    out.features.resize(n, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c)
        out.features.col(static_cast<Eigen::Index>(c)) = columns[c];
    return out;
}

Dataset synthetic_fairness_dataset(int n, std::uint64_t seed, double noise_sigma) {
    if (n < 8) throw InvalidSpecError("fairness dataset needs n >= 8");
    Rng rng(seed);
    Eigen::VectorXd z(n), x(n), y(n);
    for (int i = 0; i < n; ++i) z(i) = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < n; ++i) x(i) = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < n; ++i) y(i) = z(i) * z(i) + 0.5 * x(i) + noise_sigma * rng.normal();

    Dataset out;
    out.target = normalize_target(std::move(y));
    out.protected_attr = z;
    out.features.resize(n, 2);
    out.features.col(0) = z;
    out.features.col(1) = x;
    standardize_column(out.features.col(0), "z");
    standardize_column(out.features.col(1), "x");
    out.feature_names = {"z", "x"};
    out.feature_kinds = {ColumnKind::Continuous, ColumnKind::Continuous};
    return out;
}

Eigen::VectorXd ModelState::predict(const Eigen::MatrixXd& features) const {
    return forward_pass(*this, features).predictions;
}

ModelState init_model(int input_dim, const std::vector<int>& hidden_sizes, Task task,
                      std::uint64_t seed) {
    ModelState state;
    state.task = task;
    Rng rng(seed);
    int fan_in = input_dim;
    std::vector<int> dims = hidden_sizes;
    dims.push_back(1);
    for (int dim : dims) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        Eigen::MatrixXd w(dim, fan_in);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-limit, limit);
        state.weights.push_back(std::move(w));
        state.biases.push_back(Eigen::VectorXd::Zero(dim));
        fan_in = dim;
    }
    return state;
}

LossResult penalized_loss(const ModelState& state, const Dataset& data, double lambda,
                          const TrainConfig& cfg,
                          std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>>* warm_start) {
    if (lambda < 0.0) throw InputError("multiplier must be non-negative");
    const Eigen::Index n = data.rows();
    const Forward fw = forward_pass(state, data.features);
    const Eigen::VectorXd& yhat = fw.predictions;

    LossResult result;
    if (state.task == Task::Regression) {
        result.task_loss = (yhat - data.target).squaredNorm() / static_cast<double>(n);
    } else {
        const auto& y = data.target;
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = std::clamp(yhat(i), 1e-12, 1.0 - 1e-12);
            acc -= y(i) * std::log(p) + (1.0 - y(i)) * std::log(1.0 - p);
        }
        result.task_loss = acc / static_cast<double>(n);
    }

    // dLoss/dPredictions; for binary tasks this is the logit-space gradient.
    Eigen::VectorXd dloss_dout;
    if (state.task == Task::Regression)
        dloss_dout = 2.0 * (yhat - data.target) / static_cast<double>(n);
    else
        dloss_dout = (yhat - data.target) / static_cast<double>(n);

    result.loss = result.task_loss;
    if (cfg.penalizer != Penalizer::None) {
        const double pred_sigma = stddev_of(yhat);
        if (pred_sigma * pred_sigma < kTinyVariance) {
            result.degenerate = true;
            result.constraint = 0.0;
        } else {
            SolverConfig solver = cfg.solver;
            if (warm_start && warm_start->has_value()) solver.warm_start = **warm_start;
            const SampleVector z(data.protected_attr, "z");
            const SampleVector preds(yhat, "yhat");
            GradientResult grad =
                cfg.penalizer == Penalizer::HgrKb
                    ? hgr_kb_subgradient(z, preds, cfg.deg, solver)
                    : hgr_sk_gradient(z, preds, cfg.sk_degree, solver);
            result.constraint = grad.value;
            if (warm_start) *warm_start = std::make_pair(grad.frozen_alpha, grad.frozen_beta);
            const double hinge = std::max(0.0, grad.value - cfg.tau);
            result.loss += lambda * hinge;
            if (grad.value > cfg.tau) {
                // For binary tasks route the penalty through the logistic map.
                if (state.task == Task::Binary) {
                    const Eigen::VectorXd dsig = yhat.array() * (1.0 - yhat.array());
                    dloss_dout += lambda * grad.gradient.cwiseProduct(dsig);
                } else {
                    dloss_dout += lambda * grad.gradient;
                }
            }
        }
    }

    // Backpropagation through the dense stack.
    const std::size_t n_layers = state.weights.size();
    result.weight_grads.resize(n_layers);
    result.bias_grads.resize(n_layers);
    Eigen::MatrixXd delta = dloss_dout;  // n x 1, gradient at output pre-activation
    for (std::size_t l = n_layers; l-- > 0;) {
        const Eigen::MatrixXd& incoming = fw.activations[l];
        result.weight_grads[l] = delta.transpose() * incoming;
        result.bias_grads[l] = delta.colwise().sum();
        if (l > 0) {
            Eigen::MatrixXd back = delta * state.weights[l];
            // relu mask from the stored activation
            delta = back.cwiseProduct(
                fw.activations[l].unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
        }
    }
    return result;
}

TrainRun train(const Dataset& data, const TrainConfig& cfg) {
    if (cfg.primal_lr <= 0.0 || cfg.dual_lr <= 0.0) throw InputError("learning rates must be positive");
    if (cfg.tau < 0.0 || cfg.tau > 1.0) throw InputError("tau must lie in [0, 1]");
    if (cfg.epochs < 1) throw InputError("need at least one epoch");

    const auto started = std::chrono::steady_clock::now();
    ModelState state =
        init_model(static_cast<int>(data.cols()), cfg.hidden_sizes, cfg.task, cfg.seed);

    // Adam accumulators per parameter tensor.
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;
    for (const auto& w : state.weights) {
        m_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        v_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : state.biases) {
        m_b.push_back(Eigen::VectorXd::Zero(b.size()));
        v_b.push_back(Eigen::VectorXd::Zero(b.size()));
    }
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;

    double lambda = 0.0;
    std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> warm_start;

    TrainRun run;
    run.trajectory.reserve(cfg.epochs);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        LossResult loss = penalized_loss(state, data, lambda, cfg, &warm_start);
        if (!std::isfinite(loss.loss))
            throw NumericalError("training diverged at epoch " + std::to_string(epoch) +
                                 ": non-finite loss");

        // Constraint reported even when no penalizer is enforced.
        double constraint = loss.constraint;
        bool degenerate = loss.degenerate;
        if (cfg.penalizer == Penalizer::None) {
            const Eigen::VectorXd yhat = state.predict(data.features);
            if (stddev_of(yhat) * stddev_of(yhat) < kTinyVariance) {
                degenerate = true;
            } else {
                constraint =
                    hgr_kb(SampleVector(data.protected_attr, "z"), SampleVector(yhat, "yhat"),
                           cfg.deg, cfg.solver)
                        .value;
            }
        }

        // Primal step.
        const double bias_fix1 = 1.0 - std::pow(kBeta1, epoch);
        const double bias_fix2 = 1.0 - std::pow(kBeta2, epoch);
        for (std::size_t l = 0; l < state.weights.size(); ++l) {
            m_w[l] = kBeta1 * m_w[l] + (1.0 - kBeta1) * loss.weight_grads[l];
            v_w[l] = kBeta2 * v_w[l] + (1.0 - kBeta2) * loss.weight_grads[l].cwiseAbs2();
            state.weights[l].array() -=
                cfg.primal_lr * (m_w[l].array() / bias_fix1) /
                ((v_w[l].array() / bias_fix2).sqrt() + kEps);
            m_b[l] = kBeta1 * m_b[l] + (1.0 - kBeta1) * loss.bias_grads[l];
            v_b[l] = kBeta2 * v_b[l] + (1.0 - kBeta2) * loss.bias_grads[l].cwiseAbs2();
            state.biases[l].array() -= cfg.primal_lr * (m_b[l].array() / bias_fix1) /
                                       ((v_b[l].array() / bias_fix2).sqrt() + kEps);
            if (!state.weights[l].allFinite() || !state.biases[l].allFinite())
                throw NumericalError("training diverged at epoch " + std::to_string(epoch) +
                                     ": non-finite parameters");
        }

        // Dual ascent on the multiplier, projected at zero.
        if (cfg.penalizer != Penalizer::None)
            lambda = std::max(0.0, lambda + cfg.dual_lr * std::max(0.0, constraint - cfg.tau));

        const Eigen::VectorXd yhat = state.predict(data.features);
        EpochRecord record;
        record.task_loss = loss.task_loss;
        record.score = score_of(cfg.task, data.target, yhat);
        record.constraint = constraint;
        record.lambda = lambda;
        record.degenerate = degenerate;
        run.trajectory.push_back(record);
    }

    run.final_state = std::move(state);
    run.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return run;
}

Evaluation evaluate(const ModelState& state, const Dataset& data, const DegreeConfig& deg,
                    int sk_degree) {
    Evaluation out;
    const Eigen::VectorXd yhat = state.predict(data.features);
    out.score = score_of(state.task, data.target, yhat);
    if (stddev_of(yhat) * stddev_of(yhat) < kTinyVariance) {
        out.degenerate = true;
        return out;
    }
    const SampleVector z(data.protected_attr, "z");
    const SampleVector preds(yhat, "yhat");
    out.constraint_kb = hgr_kb(z, preds, deg).value;
    out.constraint_sk = hgr_sk(z, preds, sk_degree).value;
    return out;
}

std::vector<std::vector<int>> kfold_indices(int n, int folds, std::uint64_t seed) {
    if (folds < 2 || folds > n) throw InputError("fold count must lie in [2, n]");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
        std::swap(order[i], order[j]);
    }
    std::vector<std::vector<int>> out(folds);
    for (int i = 0; i < n; ++i) out[i % folds].push_back(order[i]);
    return out;
}

}  // namespace hgr
