#pragma once

#include "doa/datagen.hpp"

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace doa {

/// Feedforward network: tanh hidden layers, one linear output unit.
struct MlpArchitecture {
    Eigen::Index input_dim = 0;
    std::vector<Eigen::Index> hidden;

    void validate() const;
    bool operator==(const MlpArchitecture&) const = default;
};

/// Layer k maps R^{cols} -> R^{rows}; the final layer has a single row.
/// Inputs are standardized as (x - input_mean) / input_scale before layer 0.
template <typename Scalar>
struct MlpParams {
    std::vector<MatrixX<Scalar>> weights;
    std::vector<VectorX<Scalar>> biases;
    VectorX<Scalar> input_mean;
    VectorX<Scalar> input_scale;

    std::size_t layers() const { return weights.size(); }
    Eigen::Index input_dim() const { return weights.empty() ? 0 : weights.front().cols(); }

    MlpArchitecture architecture() const {
        MlpArchitecture a;
        a.input_dim = input_dim();
        for (std::size_t k = 0; k + 1 < weights.size(); ++k) a.hidden.push_back(weights[k].rows());
        return a;
    }

    /// Number of trainable scalars.
    Eigen::Index parameter_count() const {
        Eigen::Index n = 0;
        for (std::size_t k = 0; k < weights.size(); ++k) n += weights[k].size() + biases[k].size();
        return n;
    }

    /// Same shapes, all trainable entries zero, normalization copied.
    MlpParams zeros_like() const {
        MlpParams z;
        for (std::size_t k = 0; k < weights.size(); ++k) {
            z.weights.push_back(MatrixX<Scalar>::Zero(weights[k].rows(), weights[k].cols()));
            z.biases.push_back(VectorX<Scalar>::Zero(biases[k].size()));
        }
        z.input_mean = input_mean;
        z.input_scale = input_scale;
        return z;
    }

    /// Flat view of the trainable entries, layer by layer (W_k column-major, then b_k).
    Scalar& coeff(Eigen::Index flat) {
        for (std::size_t k = 0; k < weights.size(); ++k) {
            if (flat < weights[k].size()) return weights[k].data()[flat];
            flat -= weights[k].size();
            if (flat < biases[k].size()) return biases[k].data()[flat];
            flat -= biases[k].size();
        }
        throw Error("MlpParams::coeff: index out of range");
    }
    Scalar coeff(Eigen::Index flat) const { return const_cast<MlpParams&>(*this).coeff(flat); }

    bool all_finite() const {
        for (std::size_t k = 0; k < weights.size(); ++k)
            if (!weights[k].allFinite() || !biases[k].allFinite()) return false;
        return input_mean.allFinite() && input_scale.allFinite();
    }
};

template <typename To, typename From>
MlpParams<To> cast_params(const MlpParams<From>& p) {
    MlpParams<To> q;
    for (std::size_t k = 0; k < p.weights.size(); ++k) {
        q.weights.push_back(p.weights[k].template cast<To>());
        q.biases.push_back(p.biases[k].template cast<To>());
    }
    q.input_mean = p.input_mean.template cast<To>();
    q.input_scale = p.input_scale.template cast<To>();
    return q;
}

/// Glorot-uniform weights, zero biases, identity input normalization.
template <typename Scalar = double>
MlpParams<Scalar> init_params(const MlpArchitecture& arch, std::uint64_t seed) {
    arch.validate();
    std::mt19937_64 gen(seed);
    MlpParams<Scalar> p;
    Eigen::Index fan_in = arch.input_dim;
    auto add_layer = [&](Eigen::Index fan_out) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::uniform_real_distribution<double> u(-limit, limit);
        MatrixX<Scalar> W(fan_out, fan_in);
        for (Eigen::Index j = 0; j < W.cols(); ++j)
            for (Eigen::Index i = 0; i < W.rows(); ++i) W(i, j) = Scalar(u(gen));
        p.weights.push_back(std::move(W));
        p.biases.push_back(VectorX<Scalar>::Zero(fan_out));
        fan_in = fan_out;
    };
    for (Eigen::Index h : arch.hidden) add_layer(h);
    add_layer(1);
    p.input_mean = VectorX<Scalar>::Zero(arch.input_dim);
    p.input_scale = VectorX<Scalar>::Ones(arch.input_dim);
    return p;
}

/// Network outputs for the columns of X (input_dim x N).
template <typename Scalar>
VectorX<Scalar> forward_batch(const MlpParams<Scalar>& p, const MatrixX<Scalar>& X) {
    require_dim("mlp forward", p.input_dim(), X.rows());
    MatrixX<Scalar> a = (X.colwise() - p.input_mean).array().colwise() / p.input_scale.array();
    for (std::size_t k = 0; k + 1 < p.layers(); ++k)
        a = ((p.weights[k] * a).colwise() + p.biases[k]).array().tanh().matrix();
    const MatrixX<Scalar> out = (p.weights.back() * a).colwise() + p.biases.back();
    return out.row(0).transpose();
}

template <typename Scalar>
Scalar forward(const MlpParams<Scalar>& p, const VectorX<Scalar>& x) {
    require_dim("mlp forward", p.input_dim(), x.size());
    return forward_batch<Scalar>(p, MatrixX<Scalar>(x))(0);
}

/// Mean squared residual over the columns of X.
template <typename Scalar>
Scalar mse_loss(const MlpParams<Scalar>& p, const MatrixX<Scalar>& X, const VectorX<Scalar>& y) {
    if (X.cols() == 0) throw Error("mse_loss: empty batch");
    require_dim("mse_loss labels", X.cols(), y.size());
    return (forward_batch(p, X) - y).squaredNorm() / Scalar(X.cols());
}

/// Exact gradient of mse_loss with respect to every weight and bias
/// (reverse mode). Normalization constants are not trained.
template <typename Scalar>
MlpParams<Scalar> gradient(const MlpParams<Scalar>& p, const MatrixX<Scalar>& X,
                           const VectorX<Scalar>& y, Scalar* loss = nullptr) {
    if (X.cols() == 0) throw Error("gradient: empty batch");
    require_dim("gradient inputs", p.input_dim(), X.rows());
    require_dim("gradient labels", X.cols(), y.size());
    const std::size_t L = p.layers();
    std::vector<MatrixX<Scalar>> acts;
    acts.reserve(L);
    acts.push_back((X.colwise() - p.input_mean).array().colwise() / p.input_scale.array());
    for (std::size_t k = 0; k + 1 < L; ++k)
        acts.push_back(((p.weights[k] * acts.back()).colwise() + p.biases[k]).array().tanh().matrix());
    const MatrixX<Scalar> out = (p.weights.back() * acts.back()).colwise() + p.biases.back();

    const Scalar n = Scalar(X.cols());
    MatrixX<Scalar> delta = (out - y.transpose()) * (Scalar(2) / n);  // dL/d(pre-activation), 1 x N
    if (loss) *loss = (out.row(0).transpose() - y).squaredNorm() / n;

    MlpParams<Scalar> g = p.zeros_like();
    for (std::size_t k = L; k-- > 0;) {
        g.weights[k].noalias() = delta * acts[k].transpose();
        g.biases[k] = delta.rowwise().sum();
        if (k == 0) break;
        MatrixX<Scalar> back = p.weights[k].transpose() * delta;
        delta = back.array() * (Scalar(1) - acts[k].array().square());
    }
    return g;
}

// Convenience overloads on data points.
double mse_loss(const MlpParams<double>& p, std::span<const DataPoint> batch);
MlpParams<double> gradient(const MlpParams<double>& p, std::span<const DataPoint> batch);

struct TrainConfig {
    double learning_rate = 1e-3;
    double final_learning_rate = -1.0;  ///< < 0: constant rate; else exponential decay to it
    std::size_t batch_size = 256;
    std::size_t epochs = 200;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    bool standardize = true;  ///< fit input normalization on the training set
    bool verbose = false;

    void validate() const;
};

struct TrainHistory {
    std::vector<double> train_loss;  ///< mean mini-batch loss per epoch
    std::vector<double> val_rmse;
    std::size_t best_epoch = 0;
};

struct TrainResult {
    MlpParams<double> params;  ///< parameters with the lowest validation RMSE
    TrainHistory history;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

/// Mini-batch Adam with per-epoch shuffling.
TrainResult train(const MlpParams<double>& p0, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& cfg);

struct ErrorStats {
    double rmse = 0.0;
    double p25 = 0.0;
    double p75 = 0.0;
    double max_abs_error = 0.0;
    double hist_low = 0.0;
    double hist_high = 0.0;
    std::vector<std::size_t> histogram;  ///< 50 equal bins of V^NN - V on [hist_low, hist_high]
};

/// Signed-error statistics of the network on a dataset; error = V^NN - V.
ErrorStats validate(const MlpParams<double>& p, const Dataset& val_set);

/// Linear-interpolation percentile of sorted data (q in [0, 1]).
double percentile_sorted(const std::vector<double>& sorted, double q);

void save_model(const MlpParams<double>& p, std::ostream& os);
void save_model(const MlpParams<double>& p, const std::string& path);
MlpParams<double> load_model(std::istream& is, const std::string& source = "<stream>");
MlpParams<double> load_model(const std::string& path);

}  // namespace doa
