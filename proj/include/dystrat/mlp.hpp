#pragma once

#include "dystrat/common.hpp"
#include "dystrat/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace dystrat {

enum class Activation { relu };

struct MlpConfig {
    int hidden_width = 100;
    Activation activation = Activation::relu;
    double learning_rate = 1e-3;
    int batch_size = 32;  // effective batch is min(batch_size, l)
    int max_epochs = 200;
    double l2_penalty = 1e-4;
    std::uint64_t seed = 0;
    double tolerance = 1e-4;  // training-loss plateau threshold
    int patience = 10;        // plateau epochs before stopping
};

namespace detail {

struct TwoLayerNet {
    Matrix w1;  // d x h
    Vector b1;  // h
    Matrix w2;  // h x k
    Vector b2;  // k
};

inline TwoLayerNet glorot_init(int input_dim, int hidden, int output_dim, std::uint64_t seed) {
    Rng rng(seed);
    TwoLayerNet net;
    net.w1.resize(input_dim, hidden);
    net.b1 = Vector::Zero(hidden);
    net.w2.resize(hidden, output_dim);
    net.b2 = Vector::Zero(output_dim);
    const double lim1 = std::sqrt(6.0 / (input_dim + hidden));
    for (int i = 0; i < input_dim; ++i)
        for (int j = 0; j < hidden; ++j) net.w1(i, j) = rng.uniform(-lim1, lim1);
    const double lim2 = std::sqrt(6.0 / (hidden + output_dim));
    for (int i = 0; i < hidden; ++i)
        for (int j = 0; j < output_dim; ++j) net.w2(i, j) = rng.uniform(-lim2, lim2);
    return net;
}

struct AdamState {
    Matrix mw1, vw1, mw2, vw2;
    Vector mb1, vb1, mb2, vb2;
    long step = 0;

    explicit AdamState(const TwoLayerNet& net)
        : mw1(Matrix::Zero(net.w1.rows(), net.w1.cols())),
          vw1(Matrix::Zero(net.w1.rows(), net.w1.cols())),
          mw2(Matrix::Zero(net.w2.rows(), net.w2.cols())),
          vw2(Matrix::Zero(net.w2.rows(), net.w2.cols())),
          mb1(Vector::Zero(net.b1.size())),
          vb1(Vector::Zero(net.b1.size())),
          mb2(Vector::Zero(net.b2.size())),
          vb2(Vector::Zero(net.b2.size())) {}

    template <typename P, typename G>
    void update_one(P& param, G& m, G& v, const P& grad, double lr) {
        constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
        m = beta1 * m + (1.0 - beta1) * grad;
        v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        param.noalias() -= (lr / c1) * (m.array() / ((v.array() / c2).sqrt() + eps)).matrix();
    }

    void update(TwoLayerNet& net, const TwoLayerNet& grads, double lr) {
        ++step;
        update_one(net.w1, mw1, vw1, grads.w1, lr);
        update_one(net.b1, mb1, vb1, grads.b1, lr);
        update_one(net.w2, mw2, vw2, grads.w2, lr);
        update_one(net.b2, mb2, vb2, grads.b2, lr);
    }
};

/// Forward + backward for one batch. The head converts pre-activations into the
/// output-layer error delta and returns the batch's summed data loss.
///   regression: delta = z2 - y, loss = ||delta||^2 (squared error)
///   softmax/CE: delta = softmax(z2) - onehot, loss = cross-entropy sum
/// Gradients follow the reference convention (backprop sum + l2*W) / batch_rows.
template <typename HeadFn>
inline double batch_step(const TwoLayerNet& net, const Eigen::Ref<const Matrix>& xb,
                         const Eigen::Ref<const Matrix>& yb, double l2, TwoLayerNet& grads, Matrix& z1, Matrix& a1,
                         Matrix& delta, Matrix& d1, HeadFn&& head) {
    const auto rows = xb.rows();
    z1.noalias() = xb * net.w1;
    z1.rowwise() += net.b1.transpose();
    a1 = z1.cwiseMax(0.0);
    delta.noalias() = a1 * net.w2;
    delta.rowwise() += net.b2.transpose();
    const double loss = head(delta, yb);  // turns outputs into delta in place

    const double inv = 1.0 / static_cast<double>(rows);
    grads.w2.noalias() = a1.transpose() * delta;
    grads.w2.noalias() += l2 * net.w2;
    grads.w2 *= inv;
    grads.b2 = delta.colwise().sum() * inv;
    d1.noalias() = delta * net.w2.transpose();
    d1 = d1.cwiseProduct((z1.array() > 0.0).cast<double>().matrix());
    grads.w1.noalias() = xb.transpose() * d1;
    grads.w1.noalias() += l2 * net.w1;
    grads.w1 *= inv;
    grads.b1 = d1.colwise().sum() * inv;
    return loss;
}

struct TrainOutcome {
    TwoLayerNet net;
    std::vector<double> loss_curve;  // per-epoch mean data loss per target entry
};

/// Seeded mini-batch adam over a two-layer net. Epoch losses are accumulated from
/// the pre-update batch passes; training stops once the loss fails to improve on
/// its best value by more than `tolerance` for `patience` consecutive epochs.
template <typename HeadFn>
inline TrainOutcome train_two_layer(const Matrix& x, const Matrix& y, const MlpConfig& cfg, HeadFn&& head) {
    if (x.rows() != y.rows()) throw InvalidInputError("train: inputs and targets row counts differ");
    if (x.rows() < 1) throw InvalidInputError("train: need at least one instance");
    if (!x.allFinite() || !y.allFinite()) throw InvalidInputError("train: non-finite training values");
    if (cfg.hidden_width < 1 || cfg.batch_size < 1 || cfg.max_epochs < 1 || cfg.learning_rate <= 0.0 ||
        cfg.l2_penalty < 0.0 || cfg.tolerance < 0.0)
        throw InvalidParameterError("train: invalid mlp configuration");

    const int l = static_cast<int>(x.rows());
    const int d = static_cast<int>(x.cols());
    const int k = static_cast<int>(y.cols());
    const int batch = std::min(cfg.batch_size, l);

    TrainOutcome out;
    out.net = glorot_init(d, cfg.hidden_width, k, cfg.seed);
    AdamState adam(out.net);
    Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));

    std::vector<int> perm(static_cast<std::size_t>(l));
    std::iota(perm.begin(), perm.end(), 0);

    TwoLayerNet grads;
    Matrix xb(batch, d), yb(batch, k), z1, a1, delta, d1;
    double best = std::numeric_limits<double>::infinity();
    int flat_epochs = 0;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        shuffle_rng.shuffle(perm);
        double epoch_loss = 0.0;
        for (int start = 0; start < l; start += batch) {
            const int rows = std::min(batch, l - start);
            for (int r = 0; r < rows; ++r) {
                xb.row(r) = x.row(perm[static_cast<std::size_t>(start + r)]);
                yb.row(r) = y.row(perm[static_cast<std::size_t>(start + r)]);
            }
            epoch_loss +=
                batch_step(out.net, xb.topRows(rows), yb.topRows(rows), cfg.l2_penalty, grads, z1, a1, delta, d1, head);
            adam.update(out.net, grads, cfg.learning_rate);
        }
        const double mean_loss = epoch_loss / (static_cast<double>(l) * k);
        if (!std::isfinite(mean_loss))
            throw DivergenceError("training diverged at epoch " + std::to_string(epoch + 1));
        out.loss_curve.push_back(mean_loss);

        if (mean_loss > best - cfg.tolerance) {
            if (++flat_epochs >= cfg.patience) break;
        } else {
            flat_epochs = 0;
        }
        best = std::min(best, mean_loss);
    }
    return out;
}

inline double regression_head(Matrix& outputs, const Eigen::Ref<const Matrix>& yb) {
    outputs -= yb;
    return outputs.squaredNorm();
}

}  // namespace detail

/// Single-hidden-layer multi-output regressor trained by seeded mini-batch adam.
/// Deterministic: identical (data, config, seed) reproduce identical weights.
class MlpRegressor {
public:
    MlpRegressor() = default;
    MlpRegressor(detail::TwoLayerNet net, MlpConfig cfg, std::vector<double> curve)
        : net_(std::move(net)), config_(cfg), loss_curve_(std::move(curve)) {}

    int input_dim() const { return static_cast<int>(net_.w1.rows()); }
    int output_dim() const { return static_cast<int>(net_.w2.cols()); }
    const std::vector<double>& loss_curve() const { return loss_curve_; }
    const MlpConfig& config() const { return config_; }
    const detail::TwoLayerNet& net() const { return net_; }

    Vector predict(const Eigen::Ref<const Vector>& x) const {
        if (x.size() != net_.w1.rows())
            throw InvalidInputError("predict: expected " + std::to_string(net_.w1.rows()) + " features, got " +
                                    std::to_string(x.size()));
        Vector h = (net_.w1.transpose() * x + net_.b1).cwiseMax(0.0);
        return net_.w2.transpose() * h + net_.b2;
    }

    /// Row-wise batched prediction.
    Matrix predict_rows(const Eigen::Ref<const Matrix>& x) const {
        if (x.cols() != net_.w1.rows())
            throw InvalidInputError("predict: expected " + std::to_string(net_.w1.rows()) + " features, got " +
                                    std::to_string(x.cols()));
        Matrix h = x * net_.w1;
        h.rowwise() += net_.b1.transpose();
        h = h.cwiseMax(0.0);
        Matrix out = h * net_.w2;
        out.rowwise() += net_.b2.transpose();
        return out;
    }

private:
    detail::TwoLayerNet net_;
    MlpConfig config_;
    std::vector<double> loss_curve_;
};

inline MlpRegressor train_mlp(const Matrix& inputs, const Matrix& targets, const MlpConfig& cfg) {
    auto outcome = detail::train_two_layer(inputs, targets, cfg, detail::regression_head);
    return MlpRegressor(std::move(outcome.net), cfg, std::move(outcome.loss_curve));
}

/// Compares analytic gradients against central finite differences (step 1e-6) on a
/// probe set; returns the maximum relative error over every parameter.
inline double gradient_check(const MlpConfig& cfg, const Matrix& probe_x, const Matrix& probe_y) {
    if (probe_x.rows() > 32) throw InvalidParameterError("gradient_check: probe must have <= 32 instances");
    const int d = static_cast<int>(probe_x.cols());
    const int k = static_cast<int>(probe_y.cols());
    detail::TwoLayerNet net = detail::glorot_init(d, cfg.hidden_width, k, cfg.seed);

    const double inv = 1.0 / static_cast<double>(probe_x.rows());
    auto objective = [&](const detail::TwoLayerNet& n) {
        Matrix h = probe_x * n.w1;
        h.rowwise() += n.b1.transpose();
        h = h.cwiseMax(0.0);
        Matrix out = h * n.w2;
        out.rowwise() += n.b2.transpose();
        const double data = (out - probe_y).squaredNorm();
        const double reg = cfg.l2_penalty * (n.w1.squaredNorm() + n.w2.squaredNorm());
        return 0.5 * inv * (data + reg);
    };

    detail::TwoLayerNet grads;
    Matrix z1, a1, delta, d1;
    detail::batch_step(net, probe_x, probe_y, cfg.l2_penalty, grads, z1, a1, delta, d1, detail::regression_head);

    const double step = 1e-6;
    double worst = 0.0;
    auto check_tensor = [&](Matrix& param, const Matrix& analytic) {
        for (int i = 0; i < param.rows(); ++i)
            for (int j = 0; j < param.cols(); ++j) {
                const double keep = param(i, j);
                param(i, j) = keep + step;
                const double up = objective(net);
                param(i, j) = keep - step;
                const double down = objective(net);
                param(i, j) = keep;
                const double numeric = (up - down) / (2.0 * step);
                const double a = analytic(i, j);
                worst = std::max(worst, std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), 1e-8));
            }
    };
    auto check_vector = [&](Vector& param, const Vector& analytic) {
        for (int i = 0; i < param.size(); ++i) {
            const double keep = param(i);
            param(i) = keep + step;
            const double up = objective(net);
            param(i) = keep - step;
            const double down = objective(net);
            param(i) = keep;
            const double numeric = (up - down) / (2.0 * step);
            const double a = analytic(i);
            worst = std::max(worst, std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), 1e-8));
        }
    };
    check_tensor(net.w1, grads.w1);
    check_vector(net.b1, grads.b1);
    check_tensor(net.w2, grads.w2);
    check_vector(net.b2, grads.b2);
    return worst;
}

}  // namespace dystrat
