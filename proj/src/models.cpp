#include "mkc/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "mkc/errors.hpp"
#include "mkc/rng.hpp"

namespace mkc {

Eigen::MatrixXd linear_features(const Eigen::MatrixXd& X, bool intercept) {
    if (!X.allFinite()) throw InvalidParamError("feature inputs must be finite");
    if (!intercept) return X;
    Eigen::MatrixXd H(X.rows(), X.cols() + 1);
    H.col(0).setOnes();
    H.rightCols(X.cols()) = X;
    return H;
}

RandomFeatureMap RandomFeatureMap::make(int hidden, int input_dim, std::uint64_t seed) {
    if (hidden < 1 || input_dim < 1)
        throw InvalidParamError("feature map needs hidden >= 1 and input_dim >= 1");
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RandomFeatureMap map;
    map.seed = seed;
    map.input_weights.resize(hidden, input_dim);
    map.biases.resize(hidden);
    for (int l = 0; l < hidden; ++l) {
        for (int k = 0; k < input_dim; ++k) map.input_weights(l, k) = u(rng);
        map.biases[l] = u(rng);
    }
    return map;
}

namespace {

inline Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& z) {
    return 1.0 / (1.0 + (-z).exp());
}

}  // namespace

Eigen::MatrixXd elm_features(const Eigen::MatrixXd& X, const RandomFeatureMap& map) {
    if (X.cols() != map.input_weights.cols())
        throw ShapeError("input dimension does not match the feature map");
    Eigen::MatrixXd Z = X * map.input_weights.transpose();
    Z.rowwise() += map.biases.transpose();
    return sigmoid(Z.array()).matrix();
}

SmallNet SmallNet::random_init(int input_dim, std::uint64_t seed) {
    if (input_dim < 1) throw InvalidParamError("input_dim must be >= 1");
    const int h = 6;
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    SmallNet net;
    net.hidden_weights.resize(h, input_dim);
    net.hidden_biases.resize(h);
    net.output_weights.resize(h);
    for (int i = 0; i < h; ++i)
        for (int k = 0; k < input_dim; ++k) net.hidden_weights(i, k) = u(rng);
    for (int i = 0; i < h; ++i) net.hidden_biases[i] = u(rng);
    for (int i = 0; i < h; ++i) net.output_weights[i] = u(rng);
    net.output_bias = u(rng);
    return net;
}

double net_forward(const SmallNet& net, const Eigen::VectorXd& window) {
    if (window.size() != net.hidden_weights.cols())
        throw ShapeError("window length does not match the net input size");
    Eigen::ArrayXd z = (net.hidden_weights * window + net.hidden_biases).array();
    Eigen::ArrayXd s = 1.0 / (1.0 + (-z).exp());
    return net.output_weights.dot(s.matrix()) + net.output_bias;
}

Eigen::VectorXd net_predict(const SmallNet& net, const Eigen::MatrixXd& windows) {
    if (windows.cols() != net.hidden_weights.cols())
        throw ShapeError("window width does not match the net input size");
    Eigen::MatrixXd Z = windows * net.hidden_weights.transpose();
    Z.rowwise() += net.hidden_biases.transpose();
    Eigen::ArrayXXd S = sigmoid(Z.array());
    return (S.matrix() * net.output_weights).array() + net.output_bias;
}

namespace {

void check_train_inputs(const Eigen::MatrixXd& H, const Eigen::VectorXd& T,
                        const NetTrainOpt& opt) {
    if (H.rows() != T.size()) throw ShapeError("window count does not match target count");
    if (H.rows() == 0) throw EmptyInputError("no training windows");
    if (!(opt.step_size >= 0.0) || !std::isfinite(opt.step_size))
        throw InvalidParamError("step size must be finite and >= 0");
    if (opt.epochs < 0) throw InvalidParamError("epochs must be >= 0");
}

// Shared full-batch ascent loop. `score_and_slope` fills dV/dy per sample and
// returns the objective value used only for the finiteness guard.
template <typename Fn>
SmallNet ascend(const SmallNet& start, const Eigen::MatrixXd& H,
                const Eigen::VectorXd& T, const NetTrainOpt& opt, Fn score_and_slope) {
    check_train_inputs(H, T, opt);

    SmallNet net = start;
    const int n = static_cast<int>(H.rows());
    Eigen::VectorXd dy(n);
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        Eigen::MatrixXd Z = H * net.hidden_weights.transpose();
        Z.rowwise() += net.hidden_biases.transpose();
        Eigen::ArrayXXd S = sigmoid(Z.array());
        Eigen::VectorXd y = (S.matrix() * net.output_weights).array() + net.output_bias;
        Eigen::VectorXd e = T - y;
        const double value = score_and_slope(e, dy);
        if (!std::isfinite(value) || !dy.allFinite())
            throw DivergenceError("training objective became non-finite at epoch " +
                                  std::to_string(epoch));
        // Backprop through the linear output and sigmoid layer.
        Eigen::VectorXd g_wo = S.matrix().transpose() * dy;
        const double g_bo = dy.sum();
        Eigen::ArrayXXd delta =
            (dy * net.output_weights.transpose()).array() * S * (1.0 - S);
        Eigen::MatrixXd g_w = delta.matrix().transpose() * H;
        Eigen::VectorXd g_bh = delta.matrix().colwise().sum().transpose();

        net.hidden_weights += opt.step_size * g_w;
        net.hidden_biases += opt.step_size * g_bh;
        net.output_weights += opt.step_size * g_wo;
        net.output_bias += opt.step_size * g_bo;
    }
    return net;
}

// Per-sample (stochastic) ascent: one update per sample, shuffled order each
// pass. `slope` maps a single error to dV/dy for that sample.
template <typename Fn>
SmallNet ascend_per_sample(const SmallNet& start, const Eigen::MatrixXd& H,
                           const Eigen::VectorXd& T, const NetTrainOpt& opt, Fn slope) {
    check_train_inputs(H, T, opt);

    SmallNet net = start;
    const int n = static_cast<int>(H.rows());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(opt.seed);
    for (int pass = 0; pass < opt.epochs; ++pass) {
        std::shuffle(order.begin(), order.end(), rng);
        for (int idx : order) {
            const Eigen::VectorXd h = H.row(idx).transpose();
            const Eigen::ArrayXd z = (net.hidden_weights * h + net.hidden_biases).array();
            const Eigen::ArrayXd s = 1.0 / (1.0 + (-z).exp());
            const double y = net.output_weights.dot(s.matrix()) + net.output_bias;
            const double dy = slope(T[idx] - y);
            const Eigen::ArrayXd delta = dy * net.output_weights.array() * s * (1.0 - s);
            net.hidden_weights += opt.step_size * (delta.matrix() * h.transpose());
            net.hidden_biases += opt.step_size * delta.matrix();
            net.output_weights += opt.step_size * dy * s.matrix();
            net.output_bias += opt.step_size * dy;
        }
        if (!net.hidden_weights.allFinite() || !net.hidden_biases.allFinite() ||
            !net.output_weights.allFinite() || !std::isfinite(net.output_bias))
            throw DivergenceError("training diverged during pass " + std::to_string(pass));
    }
    return net;
}

}  // namespace

double mkc_slope_scale(const MkcParams& params) {
    double slope = 0.0;
    double psi0 = 0.0;
    for (int i = 0; i < params.m(); ++i) {
        const double li = params.lambdas[i];
        const double ci = params.centers[i];
        const double si = params.sigmas[i];
        const double k = gaussian_kernel(ci, si) / (si * si);
        slope += li * k * (1.0 - ci * ci / (si * si));
        psi0 += li * k;
    }
    if (!(psi0 > 0.0)) return 1.0;  // degenerate mixture; leave the gradient alone
    return 2.0 / std::max(slope, 0.2 * psi0);
}

SmallNet net_train_mkc(const SmallNet& net, const Eigen::MatrixXd& windows,
                       const Eigen::VectorXd& targets, const MkcParams& params,
                       const NetTrainOpt& opt) {
    if (opt.per_sample) {
        const double scale = mkc_slope_scale(params);
        return ascend_per_sample(net, windows, targets, opt, [&](double e) {
            return scale * (psi_weight(e, params) * e - zeta_weight(e, params));
        });
    }
    const int n = static_cast<int>(windows.rows());
    return ascend(net, windows, targets, opt,
                  [&](const Eigen::VectorXd& e, Eigen::VectorXd& dy) {
                      for (int j = 0; j < n; ++j) {
                          const double psi = psi_weight(e[j], params);
                          const double zeta = zeta_weight(e[j], params);
                          dy[j] = (psi * e[j] - zeta) / n;
                      }
                      return mkc_estimate(e, params);
                  });
}

SmallNet net_train_mse(const SmallNet& net, const Eigen::MatrixXd& windows,
                       const Eigen::VectorXd& targets, const NetTrainOpt& opt) {
    if (opt.per_sample) {
        return ascend_per_sample(net, windows, targets, opt,
                                 [](double e) { return 2.0 * e; });
    }
    const int n = static_cast<int>(windows.rows());
    return ascend(net, windows, targets, opt,
                  [&](const Eigen::VectorXd& e, Eigen::VectorXd& dy) {
                      dy = 2.0 * e / n;
                      return -e.squaredNorm() / n;
                  });
}

}  // namespace mkc
