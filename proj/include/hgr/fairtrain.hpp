#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hgr/correlation.hpp"

namespace hgr {

enum class ColumnKind { Continuous, Categorical };

// Declares how to read a CSV into a training problem: which column is the
// target, which is the protected attribute, and which inputs are categorical.
struct DatasetSchema {
    std::string target;
    std::string protected_attr;
    std::vector<std::string> categorical;
};

// Preprocessed tabular data: continuous inputs standardized, categorical
// inputs one-hot expanded, target normalized to [0,1].
struct Dataset {
    Eigen::MatrixXd features;                 // n x m
    Eigen::VectorXd target;                   // n, in [0,1] (or {0,1} for binary tasks)
    Eigen::VectorXd protected_attr;           // n, continuous, as loaded
    std::vector<std::string> feature_names;   // m, post-expansion
    std::vector<ColumnKind> feature_kinds;    // m

    Eigen::Index rows() const { return features.rows(); }
    Eigen::Index cols() const { return features.cols(); }
    Dataset subset(const std::vector<int>& row_indices) const;
};

Dataset load_csv(const std::string& path, const DatasetSchema& schema);

// Regression benchmark with a protected attribute whose square drives the
// target: z ~ U[-1,1], x ~ U[-1,1], y = z^2 + 0.5 x + noise, rescaled to [0,1].
Dataset synthetic_fairness_dataset(int n, std::uint64_t seed, double noise_sigma = 0.05);

enum class Penalizer { None, HgrKb, HgrSk };
enum class Task { Regression, Binary };

struct TrainConfig {
    double tau = 0.3;               // constraint threshold
    Penalizer penalizer = Penalizer::None;
    DegreeConfig deg{5, 5};         // degrees for the hgr_kb penalizer
    int sk_degree = 5;              // degree for the hgr_sk penalizer
    double primal_lr = 1e-3;
    double dual_lr = 1e-3;
    int epochs = 500;
    std::uint64_t seed = 0;
    Task task = Task::Regression;
    std::vector<int> hidden_sizes{32, 32};
    SolverConfig solver;            // indicator solver settings; warm start is managed per epoch
};

// Fully-connected network parameters: rectifier hidden layers, identity or
// logistic output depending on the task.
struct ModelState {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    Task task = Task::Regression;

    Eigen::VectorXd predict(const Eigen::MatrixXd& features) const;
};

ModelState init_model(int input_dim, const std::vector<int>& hidden_sizes, Task task,
                      std::uint64_t seed);

struct EpochRecord {
    double task_loss = 0.0;
    double score = 0.0;        // R^2 or AUC on the training split
    double constraint = 0.0;   // indicator value between z and the predictions
    double lambda = 0.0;
    bool degenerate = false;   // predictions had no variance; penalty skipped
};

struct TrainRun {
    std::vector<EpochRecord> trajectory;
    ModelState final_state;
    double wall_clock_seconds = 0.0;
};

// Loss value and parameter gradient for one pass: task loss plus
// lambda * max{0, HGR(z, yhat) - tau}, the penalty branch backpropagating the
// indicator's envelope gradient through the network.
struct LossResult {
    double loss = 0.0;
    double task_loss = 0.0;
    double constraint = 0.0;
    bool degenerate = false;
    std::vector<Eigen::MatrixXd> weight_grads;
    std::vector<Eigen::VectorXd> bias_grads;
};
LossResult penalized_loss(const ModelState& state, const Dataset& data, double lambda,
                          const TrainConfig& cfg,
                          std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>>* warm_start = nullptr);

// Full-batch Adam on the parameters alternated with projected dual ascent on
// the multiplier. Deterministic given the seed.
TrainRun train(const Dataset& data, const TrainConfig& cfg);

struct Evaluation {
    double score = 0.0;          // R^2 for regression, AUC for binary
    double constraint_kb = 0.0;  // hgr_kb(z, yhat)
    double constraint_sk = 0.0;  // hgr_sk(z, yhat)
    bool degenerate = false;     // constant predictions; constraints reported as 0
};
Evaluation evaluate(const ModelState& state, const Dataset& data, const DegreeConfig& deg,
                    int sk_degree = 5);

// Deterministic shuffled k-fold assignment: returns per-fold row index lists.
std::vector<std::vector<int>> kfold_indices(int n, int folds, std::uint64_t seed);

}  // namespace hgr
