#include "doa/mlp.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

namespace doa {

void MlpArchitecture::validate() const {
    if (input_dim < 1) throw Error("MlpArchitecture: input dimension must be positive");
    if (hidden.empty()) throw Error("MlpArchitecture: need at least one hidden layer");
    for (auto w : hidden)
        if (w < 1) throw Error("MlpArchitecture: layer widths must be positive");
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0)) throw Error("TrainConfig: learning rate must be positive");
    if (batch_size < 1) throw Error("TrainConfig: batch size must be at least 1");
    if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1) || !(epsilon > 0))
        throw Error("TrainConfig: invalid moment parameters");
}

namespace {

void to_matrices(std::span<const DataPoint> batch, Mat& X, Vec& y) {
    if (batch.empty()) throw Error("empty batch");
    const Eigen::Index n = batch.front().x.size();
    X.resize(n, static_cast<Eigen::Index>(batch.size()));
    y.resize(static_cast<Eigen::Index>(batch.size()));
    for (std::size_t i = 0; i < batch.size(); ++i) {
        require_dim("batch point", n, batch[i].x.size());
        X.col(static_cast<Eigen::Index>(i)) = batch[i].x;
        y(static_cast<Eigen::Index>(i)) = batch[i].v;
    }
}

}  // namespace

double mse_loss(const MlpParams<double>& p, std::span<const DataPoint> batch) {
    Mat X;
    Vec y;
    to_matrices(batch, X, y);
    return mse_loss<double>(p, X, y);
}

MlpParams<double> gradient(const MlpParams<double>& p, std::span<const DataPoint> batch) {
    Mat X;
    Vec y;
    to_matrices(batch, X, y);
    return gradient<double>(p, X, y);
}

TrainResult train(const MlpParams<double>& p0, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& cfg) {
    cfg.validate();
    if (train_set.size() == 0) throw Error("train: empty training set");
    require_dim("train: training set dimension", p0.input_dim(), train_set.dim);
    require_dim("train: validation set dimension", p0.input_dim(), val_set.dim);

    const Mat X = train_set.inputs();
    const Vec y = train_set.labels();
    const Mat Xv = val_set.inputs();
    const Vec yv = val_set.labels();
    const Eigen::Index N = X.cols();

    TrainResult result;
    MlpParams<double> p = p0;
    if (cfg.standardize) {
        p.input_mean = X.rowwise().mean();
        const Mat centered = X.colwise() - p.input_mean;
        p.input_scale = (centered.array().square().rowwise().mean()).sqrt();
        for (Eigen::Index i = 0; i < p.input_scale.size(); ++i)
            if (!(p.input_scale(i) > 1e-12)) p.input_scale(i) = 1.0;
    }

    MlpParams<double> m1 = p.zeros_like(), m2 = p.zeros_like();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(N));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(cfg.seed);

    double best_rmse = std::numeric_limits<double>::infinity();
    result.params = p;
    std::size_t t = 0;
    Mat Xb;
    Vec yb;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        double lr = cfg.learning_rate;
        if (cfg.final_learning_rate > 0 && cfg.epochs > 1)
            lr *= std::pow(cfg.final_learning_rate / cfg.learning_rate,
                           static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1));
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        for (Eigen::Index start = 0; start < N; start += static_cast<Eigen::Index>(cfg.batch_size)) {
            const Eigen::Index len = std::min<Eigen::Index>(static_cast<Eigen::Index>(cfg.batch_size), N - start);
            Xb.resize(X.rows(), len);
            yb.resize(len);
            for (Eigen::Index j = 0; j < len; ++j) {
                Xb.col(j) = X.col(order[static_cast<std::size_t>(start + j)]);
                yb(j) = y(order[static_cast<std::size_t>(start + j)]);
            }
            double loss = 0.0;
            const auto g = gradient<double>(p, Xb, yb, &loss);
            if (!std::isfinite(loss))
                throw TrainingError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                    "; try a smaller learning rate (current " + std::to_string(lr) + ")");
            loss_sum += loss * static_cast<double>(len);

            ++t;
            const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
            const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
            auto adam = [&](auto& param, auto& m, auto& v, const auto& grad) {
                m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
                v = cfg.beta2 * v.array() + (1.0 - cfg.beta2) * grad.array().square();
                param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
            };
            for (std::size_t k = 0; k < p.layers(); ++k) {
                adam(p.weights[k], m1.weights[k], m2.weights[k], g.weights[k]);
                adam(p.biases[k], m1.biases[k], m2.biases[k], g.biases[k]);
            }
        }
        result.history.train_loss.push_back(loss_sum / static_cast<double>(N));
        const double rmse = val_set.size() ? std::sqrt(mse_loss<double>(p, Xv, yv))
                                           : std::sqrt(result.history.train_loss.back());
        if (!std::isfinite(rmse))
            throw TrainingError("train: non-finite validation error at epoch " + std::to_string(epoch) +
                                "; try a smaller learning rate");
        result.history.val_rmse.push_back(rmse);
        if (rmse < best_rmse) {
            best_rmse = rmse;
            result.params = p;
            result.history.best_epoch = epoch;
        }
        if (cfg.verbose && (epoch % 50 == 0 || epoch + 1 == cfg.epochs))
            std::cerr << "epoch " << epoch << "  train_loss " << result.history.train_loss.back()
                      << "  val_rmse " << rmse << '\n';
    }
    return result;
}

double percentile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw Error("percentile of empty data");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ErrorStats validate(const MlpParams<double>& p, const Dataset& val_set) {
    if (val_set.size() == 0) throw Error("validate: empty validation set");
    const Vec err = forward_batch<double>(p, val_set.inputs()) - val_set.labels();
    ErrorStats s;
    s.rmse = std::sqrt(err.squaredNorm() / static_cast<double>(err.size()));
    std::vector<double> sorted(err.data(), err.data() + err.size());
    std::sort(sorted.begin(), sorted.end());
    s.p25 = percentile_sorted(sorted, 0.25);
    s.p75 = percentile_sorted(sorted, 0.75);
    s.max_abs_error = err.cwiseAbs().maxCoeff();

    constexpr std::size_t bins = 50;
    const double half = s.max_abs_error > 0 ? s.max_abs_error : 1e-12;
    s.hist_low = -half;
    s.hist_high = half;
    s.histogram.assign(bins, 0);
    for (double e : sorted) {
        auto b = static_cast<std::size_t>((e - s.hist_low) / (2.0 * half) * bins);
        s.histogram[std::min(b, bins - 1)]++;
    }
    return s;
}

// -----------------------------------------------------------------------------
// Model file
// -----------------------------------------------------------------------------

namespace {

constexpr const char* kModelMagic = "doa-mlp";
constexpr int kModelVersion = 1;

void put(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

class TokenReader {
public:
    TokenReader(std::istream& is, std::string source) : is_(is), source_(std::move(source)) {}

    std::string word() {
        std::string w;
        if (!(is_ >> w)) throw ParseError(source_, line(), "unexpected end of model file");
        return w;
    }
    void expect(const std::string& w) {
        const auto got = word();
        if (got != w) throw ParseError(source_, line(), "expected '" + w + "', got '" + got + "'");
    }
    long integer() {
        const auto w = word();
        long v = 0;
        const auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
        if (ec != std::errc() || p != w.data() + w.size())
            throw ParseError(source_, line(), "bad integer '" + w + "'");
        return v;
    }
    double real() {
        const auto w = word();
        double v = 0;
        const auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
        if (ec != std::errc() || p != w.data() + w.size())
            throw ParseError(source_, line(), "bad number '" + w + "'");
        return v;
    }
    std::size_t line() {
        // Line of the current read position, for diagnostics only.
        is_.clear();
        const auto pos = is_.tellg();
        if (pos < 0) return 0;
        is_.seekg(0);
        std::size_t n = 1;
        for (std::streamoff i = 0; i < pos; ++i)
            if (is_.get() == '\n') ++n;
        is_.seekg(pos);
        return n;
    }
    const std::string& source() const { return source_; }

private:
    std::istream& is_;
    std::string source_;
};

}  // namespace

void save_model(const MlpParams<double>& p, std::ostream& os) {
    const auto arch = p.architecture();
    os << kModelMagic << ' ' << kModelVersion << '\n';
    os << "input_dim " << arch.input_dim << '\n';
    os << "hidden " << arch.hidden.size();
    for (auto h : arch.hidden) os << ' ' << h;
    os << "\nactivation tanh\n";
    os << "input_mean";
    for (Eigen::Index i = 0; i < p.input_mean.size(); ++i) os << ' ', put(os, p.input_mean(i));
    os << "\ninput_scale";
    for (Eigen::Index i = 0; i < p.input_scale.size(); ++i) os << ' ', put(os, p.input_scale(i));
    os << '\n';
    for (std::size_t k = 0; k < p.layers(); ++k) {
        const auto& W = p.weights[k];
        os << "layer " << k << ' ' << W.rows() << ' ' << W.cols() << '\n';
        for (Eigen::Index i = 0; i < W.rows(); ++i) {
            for (Eigen::Index j = 0; j < W.cols(); ++j) {
                if (j) os << ' ';
                put(os, W(i, j));
            }
            os << '\n';
        }
        os << "bias";
        for (Eigen::Index i = 0; i < p.biases[k].size(); ++i) os << ' ', put(os, p.biases[k](i));
        os << '\n';
    }
    os << "end\n";
}

void save_model(const MlpParams<double>& p, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write model '" + path + "'");
    save_model(p, os);
    if (!os) throw Error("error while writing model '" + path + "'");
}

MlpParams<double> load_model(std::istream& is, const std::string& source) {
    TokenReader r(is, source);
    r.expect(kModelMagic);
    const long version = r.integer();
    if (version != kModelVersion)
        throw ParseError(source, 1, "unsupported model format version " + std::to_string(version));
    r.expect("input_dim");
    MlpArchitecture arch;
    arch.input_dim = r.integer();
    r.expect("hidden");
    const long n_hidden = r.integer();
    if (n_hidden < 1 || n_hidden > 100000) throw ParseError(source, r.line(), "bad hidden layer count");
    for (long k = 0; k < n_hidden; ++k) arch.hidden.push_back(r.integer());
    try {
        arch.validate();
    } catch (const Error& e) {
        throw ParseError(source, r.line(), e.what());
    }
    r.expect("activation");
    r.expect("tanh");

    MlpParams<double> p;
    p.input_mean.resize(arch.input_dim);
    p.input_scale.resize(arch.input_dim);
    r.expect("input_mean");
    for (Eigen::Index i = 0; i < arch.input_dim; ++i) p.input_mean(i) = r.real();
    r.expect("input_scale");
    for (Eigen::Index i = 0; i < arch.input_dim; ++i) p.input_scale(i) = r.real();

    Eigen::Index fan_in = arch.input_dim;
    std::vector<Eigen::Index> widths = arch.hidden;
    widths.push_back(1);
    for (std::size_t k = 0; k < widths.size(); ++k) {
        r.expect("layer");
        if (r.integer() != static_cast<long>(k)) throw ParseError(source, r.line(), "layers out of order");
        const long rows = r.integer(), cols = r.integer();
        if (rows != widths[k] || cols != fan_in)
            throw ParseError(source, r.line(), "layer " + std::to_string(k) + " shape does not match architecture");
        Mat W(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) W(i, j) = r.real();
        r.expect("bias");
        Vec b(rows);
        for (Eigen::Index i = 0; i < rows; ++i) b(i) = r.real();
        p.weights.push_back(std::move(W));
        p.biases.push_back(std::move(b));
        fan_in = rows;
    }
    r.expect("end");
    if (!p.all_finite()) throw ParseError(source, r.line(), "non-finite parameter");
    return p;
}

MlpParams<double> load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open model '" + path + "'");
    return load_model(is, path);
}

}  // namespace doa
