#include "doa/mlp.hpp"
#include "../support/gradient_check.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace doa;
using doa::testing::gradient_check;

namespace {

// One hidden unit: y = w2 tanh(w1 x + b1) + b2.
MlpParams<double> single_unit(double w1, double b1, double w2, double b2) {
    auto p = init_params(MlpArchitecture{1, {1}}, 0);
    p.weights[0](0, 0) = w1;
    p.biases[0](0) = b1;
    p.weights[1](0, 0) = w2;
    p.biases[1](0) = b2;
    return p;
}

Dataset make_dataset(const Mat& X, const Vec& y) {
    Dataset d;
    d.dim = X.rows();
    for (Eigen::Index j = 0; j < X.cols(); ++j) d.points.push_back({X.col(j), y(j)});
    return d;
}

}  // namespace

TEST_SUITE("mlp") {

TEST_CASE("forward pass of a single hidden unit") {
    const auto p = single_unit(1.0, 0.0, 2.0, 0.5);
    Vec x(1);
    x << 1.0;
    CHECK(forward(p, x) == doctest::Approx(2.0 * std::tanh(1.0) + 0.5).epsilon(1e-15));
    CHECK(forward(p, x) == doctest::Approx(2.0231883).epsilon(1e-7));
}

TEST_CASE("loss and gradient of a single hidden unit") {
    const auto p = single_unit(1.0, 0.0, 2.0, 0.5);
    Mat X(1, 1);
    X << 1.0;
    Vec y(1);
    y << 0.0;
    const double yhat = 2.0 * std::tanh(1.0) + 0.5;
    CHECK(mse_loss<double>(p, X, y) == doctest::Approx(yhat * yhat));
    const auto g = gradient<double>(p, X, y);
    CHECK(g.weights[1](0, 0) == doctest::Approx(2.0 * yhat * std::tanh(1.0)));
    CHECK(g.biases[1](0) == doctest::Approx(2.0 * yhat));
    const double sech2 = 1.0 - std::tanh(1.0) * std::tanh(1.0);
    CHECK(g.weights[0](0, 0) == doctest::Approx(2.0 * yhat * 2.0 * sech2));

    Mat X2(1, 2);
    X2 << 0.0, 0.0;
    Vec y2(2);
    y2 << 0.3, 0.7;
    // Output 0.5 at x = 0: residuals 0.2 and -0.2.
    CHECK(mse_loss<double>(p, X2, y2) == doctest::Approx(0.04));
    y2 << 0.4, 0.8;
    CHECK(mse_loss<double>(p, X2, y2) == doctest::Approx(0.05));
    CHECK(mse_loss<double>(single_unit(0, 0, 0, 0), X2, Vec::Ones(2)) == 1.0);
    y2 << 0.5, 0.5;
    CHECK(gradient<double>(p, X2, y2).weights[1].isZero());
}

TEST_CASE("gradient agrees with central differences") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (const auto& hidden : {std::vector<Eigen::Index>{3}, {5, 4}, {8, 8, 8}}) {
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            auto p = init_params(MlpArchitecture{2, hidden}, seed);
            for (Eigen::Index i = 0; i < p.parameter_count(); ++i) p.coeff(i) += 0.1 * u(gen);
            p.input_mean << 0.2, -0.1;
            p.input_scale << 1.5, 0.7;
            Mat X(2, 16);
            for (Eigen::Index j = 0; j < X.size(); ++j) X.data()[j] = u(gen);
            Vec y(16);
            for (Eigen::Index j = 0; j < y.size(); ++j) y(j) = 0.25 * (u(gen) + 2.0);
            CHECK(gradient_check(p, X, y) < 1e-5);
        }
    }
}

TEST_CASE("span overloads match the matrix form") {
    const auto p = init_params(MlpArchitecture{2, {4}}, 3);
    std::vector<DataPoint> pts;
    Mat X(2, 3);
    Vec y(3);
    for (int j = 0; j < 3; ++j) {
        Vec x(2);
        x << 0.1 * j, -0.2 * j;
        pts.push_back({x, 0.3 * j});
        X.col(j) = x;
        y(j) = 0.3 * j;
    }
    CHECK(mse_loss(p, pts) == mse_loss<double>(p, X, y));
    CHECK(gradient(p, pts).weights[0] == gradient<double>(p, X, y).weights[0]);
    CHECK_THROWS_AS(mse_loss(p, std::span<const DataPoint>{}), Error);
}

TEST_CASE("initialisation") {
    const MlpArchitecture arch{2, {40, 40, 40}};
    const auto a = init_params(arch, 11);
    const auto b = init_params(arch, 11);
    const auto c = init_params(arch, 12);
    CHECK(a.layers() == 4);
    CHECK(a.parameter_count() == 2 * 40 + 40 + 2 * (40 * 40 + 40) + 40 + 1);
    CHECK(a.weights[1] == b.weights[1]);
    CHECK(a.weights[1] != c.weights[1]);
    for (const auto& bias : a.biases) CHECK(bias.isZero());
    CHECK(a.architecture() == arch);
    CHECK_THROWS_AS(init_params(MlpArchitecture{2, {}}, 0), Error);
    CHECK_THROWS_AS(init_params(MlpArchitecture{0, {3}}, 0), Error);
}

TEST_CASE("Glorot variance on a wide layer") {
    const auto p = init_params(MlpArchitecture{1000, {1000}}, 1);
    const Mat& W = p.weights[0];
    const double mean = W.mean();
    const double var = (W.array() - mean).square().mean();
    const double expected = 2.0 / 2000.0;
    CHECK(std::abs(var - expected) < 0.2 * expected);
    CHECK(W.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 2000.0));
}

TEST_CASE("output is bounded by the last layer") {
    std::mt19937_64 gen(8);
    std::normal_distribution<double> n(0.0, 50.0);
    const auto p = init_params(MlpArchitecture{2, {6, 6}}, 4);
    const double bound = p.weights.back().cwiseAbs().sum() + std::abs(p.biases.back()(0));
    for (int k = 0; k < 200; ++k) {
        Vec x(2);
        x << n(gen), n(gen);
        CHECK(std::abs(forward(p, x)) <= bound);
    }
}

TEST_CASE("dimension mismatches are rejected") {
    const auto p = init_params(MlpArchitecture{2, {3}}, 0);
    CHECK_THROWS_AS(forward<double>(p, Vec::Zero(3)), DimensionError);
    CHECK_THROWS_AS(mse_loss<double>(p, Mat::Zero(2, 4), Vec::Zero(3)), DimensionError);
    CHECK_THROWS_AS(mse_loss<double>(p, Mat::Zero(2, 0), Vec::Zero(0)), Error);
}

TEST_CASE("training drives a constant target to zero loss") {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    Mat X(2, 2000);
    for (Eigen::Index j = 0; j < X.size(); ++j) X.data()[j] = u(gen);
    const Dataset d = make_dataset(X, Vec::Constant(2000, 0.5));
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.batch_size = 32;
    cfg.seed = 3;
    const auto r = train(init_params(MlpArchitecture{2, {1}}, 2), d, d, cfg);
    REQUIRE(r.history.train_loss.size() == 200);
    CHECK(r.history.val_rmse.size() == 200);
    CHECK(r.history.train_loss.back() <= 1e-6);
    CHECK(validate(r.params, d).rmse <= 1e-3);
}

TEST_CASE("training fits a one-dimensional tanh") {
    Mat X(1, 1000);
    Vec y(1000);
    for (Eigen::Index j = 0; j < 1000; ++j) {
        X(0, j) = -2.0 + 4.0 * static_cast<double>(j) / 999.0;
        y(j) = std::tanh(X(0, j));
    }
    const Dataset d = make_dataset(X, y);
    TrainConfig cfg;
    cfg.epochs = 400;
    cfg.batch_size = 64;
    cfg.learning_rate = 3e-3;
    cfg.final_learning_rate = 1e-4;
    cfg.seed = 1;
    const auto r = train(init_params(MlpArchitecture{1, {16, 16}}, 9), d, d, cfg);
    CHECK(validate(r.params, d).rmse < 1e-3);
    CHECK(r.history.val_rmse[r.history.best_epoch] == doctest::Approx(validate(r.params, d).rmse));
}

TEST_CASE("training is deterministic") {
    Mat X(2, 100);
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (Eigen::Index j = 0; j < X.size(); ++j) X.data()[j] = u(gen);
    Vec y = (X.row(0).array() * X.row(1).array()).transpose();
    const Dataset d = make_dataset(X, y);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 16;
    const auto a = train(init_params(MlpArchitecture{2, {5}}, 1), d, d, cfg);
    const auto b = train(init_params(MlpArchitecture{2, {5}}, 1), d, d, cfg);
    CHECK(a.history.train_loss == b.history.train_loss);
    CHECK(a.params.weights[0] == b.params.weights[0]);
}

TEST_CASE("training input checks") {
    const auto p = init_params(MlpArchitecture{2, {3}}, 0);
    Dataset empty;
    empty.dim = 2;
    CHECK_THROWS_AS(train(p, empty, empty, TrainConfig{}), Error);
    Dataset wrong = make_dataset(Mat::Zero(3, 4), Vec::Zero(4));
    CHECK_THROWS_AS(train(p, wrong, wrong, TrainConfig{}), DimensionError);
    TrainConfig bad;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("divergent training reports the learning rate") {
    Mat X(1, 64);
    for (Eigen::Index j = 0; j < 64; ++j) X(0, j) = static_cast<double>(j);
    const Dataset d = make_dataset(X, Vec::Constant(64, 1e300));
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.standardize = false;
    CHECK_THROWS_WITH_AS(train(init_params(MlpArchitecture{1, {2}}, 0), d, d, cfg),
                         doctest::Contains("learning rate"), TrainingError);
}

TEST_CASE("validation statistics") {
    SUBCASE("perfect predictor") {
        const auto p = single_unit(0.0, 0.0, 0.0, 0.0);
        const auto s = validate(p, make_dataset(Mat::Random(1, 10), Vec::Zero(10)));
        CHECK(s.rmse == 0.0);
        CHECK(s.max_abs_error == 0.0);
        CHECK(s.p25 == 0.0);
        CHECK(s.p75 == 0.0);
    }
    SUBCASE("symmetric errors") {
        const auto p = single_unit(0.0, 0.0, 0.0, 0.5);
        Vec y(8);
        y << 0.4, 0.6, 0.4, 0.6, 0.4, 0.6, 0.4, 0.6;
        const auto s = validate(p, make_dataset(Mat::Zero(1, 8), y));
        CHECK(s.rmse == doctest::Approx(0.1));
        CHECK(s.p25 == doctest::Approx(-0.1));
        CHECK(s.p75 == doctest::Approx(0.1));
        CHECK(s.max_abs_error == doctest::Approx(0.1));
        REQUIRE(s.histogram.size() == 50);
        CHECK(s.histogram.front() == 4);
        CHECK(s.histogram.back() == 4);
    }
    SUBCASE("rmse is the root of the loss") {
        const auto p = init_params(MlpArchitecture{2, {4}}, 6);
        const Mat X = Mat::Random(2, 30);
        const Vec y = Vec::Random(30);
        CHECK(validate(p, make_dataset(X, y)).rmse == doctest::Approx(std::sqrt(mse_loss<double>(p, X, y))));
    }
    CHECK_THROWS_AS(validate(single_unit(0, 0, 0, 0), Dataset{}), Error);
}

TEST_CASE("percentiles interpolate") {
    CHECK(percentile_sorted({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25) == 2.0);
    CHECK(percentile_sorted({0.0, 1.0}, 0.75) == 0.75);
    CHECK(percentile_sorted({7.0}, 0.5) == 7.0);
    CHECK_THROWS_AS(percentile_sorted({}, 0.5), Error);
}

TEST_CASE("model file round trip") {
    auto p = init_params(MlpArchitecture{2, {7, 3}}, 21);
    p.biases[1] << 0.1, -1e-300, 3.0;
    p.input_mean << 0.5, -0.25;
    p.input_scale << 2.0, 1.0 / 3.0;
    std::stringstream ss;
    save_model(p, ss);
    const std::string text = ss.str();
    CHECK(text.rfind("doa-mlp 1", 0) == 0);
    const auto q = load_model(ss);
    CHECK(q.architecture() == p.architecture());
    for (std::size_t k = 0; k < p.layers(); ++k) {
        CHECK(q.weights[k] == p.weights[k]);
        CHECK(q.biases[k] == p.biases[k]);
    }
    CHECK(q.input_mean == p.input_mean);
    CHECK(q.input_scale == p.input_scale);
    Vec x(2);
    x << 0.3, -0.9;
    CHECK(forward(q, x) == forward(p, x));

    SUBCASE("truncated file") {
        std::istringstream cut(text.substr(0, text.size() / 2));
        CHECK_THROWS_AS(load_model(cut), Error);
    }
    SUBCASE("wrong magic") {
        std::istringstream bad("doa-mlp 9\n");
        CHECK_THROWS_AS(load_model(bad), Error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_model("/nonexistent/model.txt"), Error);
    }
}

}  // TEST_SUITE
