#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "hgr/fairtrain.hpp"
#include "hgr/gradients.hpp"
#include "test_helpers.hpp"

using namespace hgr;

namespace {

std::string write_temp_csv(const std::string& body) {
    static int counter = 0;
    const std::string path = "fairtrain_test_" + std::to_string(counter++) + ".csv";
    std::ofstream out(path);
    out << body;
    return path;
}

}  // namespace

TEST_CASE("csv loading standardizes continuous columns") {
    const std::string path = write_temp_csv(
        "x,z,y\n"
        "1.0,0.5,10\n"
        "2.0,0.1,20\n"
        "3.0,0.9,15\n"
        "4.0,0.3,5\n");
    DatasetSchema schema{"y", "z", {}};
    const Dataset data = load_csv(path, schema);
    std::remove(path.c_str());

    CHECK(data.rows() == 4);
    CHECK(data.cols() == 2);  // x and z; the target is excluded
    for (int c = 0; c < 2; ++c) {
        CHECK(std::abs(data.features.col(c).mean()) <= 1e-8);
        const double var = data.features.col(c).array().square().mean();
        CHECK(var == doctest::Approx(1.0).epsilon(1e-8));
    }
    CHECK(data.target.minCoeff() == 0.0);
    CHECK(data.target.maxCoeff() == 1.0);
    // protected column keeps its raw values
    CHECK(data.protected_attr(0) == 0.5);
}

TEST_CASE("categorical columns expand to one-hot groups") {
    const std::string path = write_temp_csv(
        "color,z,y\n"
        "red,0.5,1\n"
        "blue,0.1,2\n"
        "green,0.9,3\n"
        "red,0.3,4\n");
    DatasetSchema schema{"y", "z", {"color"}};
    const Dataset data = load_csv(path, schema);
    std::remove(path.c_str());

    CHECK(data.cols() == 4);  // 3 color levels + z
    int categorical = 0;
    for (std::size_t c = 0; c < data.feature_kinds.size(); ++c)
        if (data.feature_kinds[c] == ColumnKind::Categorical) ++categorical;
    CHECK(categorical == 3);

    // each row sums to 1 across the one-hot group
    for (int r = 0; r < 4; ++r) {
        double row_sum = 0.0;
        for (std::size_t c = 0; c < data.feature_kinds.size(); ++c)
            if (data.feature_kinds[c] == ColumnKind::Categorical) row_sum += data.features(r, c);
        CHECK(row_sum == doctest::Approx(1.0));
    }
}

TEST_CASE("schema errors are reported") {
    const std::string path = write_temp_csv("x,y\n1,2\n2,3\n3,4\n");
    CHECK_THROWS_AS(load_csv(path, DatasetSchema{"y", "missing", {}}), MissingColumnError);
    CHECK_THROWS_AS(load_csv(path, DatasetSchema{"nope", "x", {}}), MissingColumnError);
    std::remove(path.c_str());

    const std::string bad = write_temp_csv("x,y\n1,oops\n2,3\n");
    CHECK_THROWS_AS(load_csv(bad, DatasetSchema{"y", "x", {}}), NonNumericValueError);
    std::remove(bad.c_str());

    const std::string empty = write_temp_csv("x,y\n");
    CHECK_THROWS_AS(load_csv(empty, DatasetSchema{"y", "x", {}}), EmptyDatasetError);
    std::remove(empty.c_str());
}

TEST_CASE("loss without penalty is the task loss with matching gradient") {
    const Dataset data = synthetic_fairness_dataset(128, 3);
    TrainConfig cfg;
    cfg.penalizer = Penalizer::None;
    const ModelState model = init_model(2, {8}, Task::Regression, 7);

    const LossResult with_zero_lambda = penalized_loss(model, data, 0.0, cfg);
    CHECK(with_zero_lambda.loss == with_zero_lambda.task_loss);

    cfg.penalizer = Penalizer::HgrKb;
    cfg.tau = 1.0;  // hinge cannot activate
    const LossResult inactive = penalized_loss(model, data, 5.0, cfg);
    CHECK(inactive.loss == inactive.task_loss);
    for (std::size_t l = 0; l < inactive.weight_grads.size(); ++l) {
        CHECK((inactive.weight_grads[l] - with_zero_lambda.weight_grads[l])
                  .lpNorm<Eigen::Infinity>() == 0.0);
    }
}

TEST_CASE("loss gradient matches finite differences on a tiny network") {
    const Dataset data = synthetic_fairness_dataset(64, 5);
    TrainConfig cfg;
    cfg.penalizer = Penalizer::HgrKb;
    cfg.deg = {2, 2};
    cfg.tau = 0.0;  // keep the hinge active
    ModelState model = init_model(2, {3}, Task::Regression, 11);
    const double lambda = 0.7;

    const LossResult analytic = penalized_loss(model, data, lambda, cfg);

    const double step = 1e-6;
    double max_rel = 0.0;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        for (int r = 0; r < model.weights[l].rows(); ++r) {
            for (int c = 0; c < model.weights[l].cols(); ++c) {
                ModelState probe = model;
                probe.weights[l](r, c) += step;
                const double up = penalized_loss(probe, data, lambda, cfg).loss;
                probe.weights[l](r, c) -= 2.0 * step;
                const double down = penalized_loss(probe, data, lambda, cfg).loss;
                const double numeric = (up - down) / (2.0 * step);
                const double expected = analytic.weight_grads[l](r, c);
                const double scale = std::max({std::abs(numeric), std::abs(expected), 1e-7});
                if (std::max(std::abs(numeric), std::abs(expected)) > 1e-7)
                    max_rel = std::max(max_rel, std::abs(numeric - expected) / scale);
            }
        }
    }
    CHECK(max_rel <= 1e-3);
}

TEST_CASE("training is reproducible and keeps the multiplier non-negative") {
    const Dataset data = synthetic_fairness_dataset(256, 9);
    TrainConfig cfg;
    cfg.penalizer = Penalizer::HgrKb;
    cfg.deg = {3, 3};
    cfg.tau = 0.3;
    cfg.epochs = 40;
    cfg.seed = 13;
    cfg.hidden_sizes = {16};

    const TrainRun first = train(data, cfg);
    const TrainRun second = train(data, cfg);

    REQUIRE(first.trajectory.size() == 40);
    for (std::size_t e = 0; e < first.trajectory.size(); ++e) {
        CHECK(first.trajectory[e].lambda >= 0.0);
        CHECK(first.trajectory[e].task_loss == second.trajectory[e].task_loss);
        CHECK(first.trajectory[e].constraint == second.trajectory[e].constraint);
        CHECK(first.trajectory[e].lambda == second.trajectory[e].lambda);
    }
    for (std::size_t l = 0; l < first.final_state.weights.size(); ++l)
        CHECK((first.final_state.weights[l] - second.final_state.weights[l])
                  .lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("constraint pressure lowers the indicator against an unconstrained run") {
    const Dataset data = synthetic_fairness_dataset(512, 21);

    TrainConfig unconstrained;
    unconstrained.penalizer = Penalizer::None;
    unconstrained.epochs = 300;
    unconstrained.seed = 1;
    const TrainRun free_run = train(data, unconstrained);
    const Evaluation free_eval = evaluate(free_run.final_state, data, unconstrained.deg);

    TrainConfig constrained = unconstrained;
    constrained.penalizer = Penalizer::HgrKb;
    constrained.tau = 0.2;
    const TrainRun tight_run = train(data, constrained);
    const Evaluation tight_eval = evaluate(tight_run.final_state, data, constrained.deg);

    CHECK(free_eval.constraint_kb > tight_eval.constraint_kb);
    CHECK(free_eval.score > tight_eval.score);  // fairness costs accuracy here
    CHECK(tight_eval.score > 0.0);              // but beats the constant predictor
}

TEST_CASE("constant predictions are reported as degenerate, not an error") {
    const Dataset data = synthetic_fairness_dataset(64, 33);
    ModelState constant_model = init_model(2, {4}, Task::Regression, 3);
    for (auto& w : constant_model.weights) w.setZero();
    for (auto& b : constant_model.biases) b.setZero();

    const Evaluation eval = evaluate(constant_model, data, DegreeConfig{2, 2});
    CHECK(eval.degenerate);
    CHECK(eval.constraint_kb == 0.0);
    CHECK(eval.constraint_sk == 0.0);

    TrainConfig cfg;
    cfg.penalizer = Penalizer::HgrKb;
    const LossResult loss = penalized_loss(constant_model, data, 1.0, cfg);
    CHECK(loss.degenerate);
    CHECK(loss.constraint == 0.0);
    CHECK(loss.loss == loss.task_loss);
}

TEST_CASE("binary task trains with AUC scoring") {
    // threshold the fairness target into labels
    Dataset data = synthetic_fairness_dataset(256, 41);
    const double median = 0.5;
    for (int i = 0; i < data.target.size(); ++i)
        data.target(i) = data.target(i) > median ? 1.0 : 0.0;

    TrainConfig cfg;
    cfg.task = Task::Binary;
    cfg.penalizer = Penalizer::None;
    cfg.epochs = 150;
    cfg.seed = 2;
    const TrainRun run = train(data, cfg);
    const Evaluation eval = evaluate(run.final_state, data, cfg.deg);
    CHECK(eval.score > 0.7);  // easily separable synthetic labels
    CHECK(eval.score <= 1.0);
}

TEST_CASE("kfold indices partition the rows deterministically") {
    const auto folds = kfold_indices(103, 5, 77);
    CHECK(folds.size() == 5);
    std::vector<int> seen(103, 0);
    for (const auto& fold : folds)
        for (int idx : fold) ++seen[idx];
    for (int count : seen) CHECK(count == 1);

    const auto again = kfold_indices(103, 5, 77);
    for (int f = 0; f < 5; ++f) CHECK(folds[f] == again[f]);

    CHECK_THROWS_AS(kfold_indices(10, 1, 0), InputError);
}
