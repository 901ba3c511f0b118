#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "mkc/kernel.hpp"

namespace mkc {

// Prepends an all-ones column when `intercept` is set, otherwise returns X.
Eigen::MatrixXd linear_features(const Eigen::MatrixXd& X, bool intercept);

// Random sigmoid hidden layer: weights and biases uniform in [-1,1],
// regenerated deterministically from the seed.
struct RandomFeatureMap {
    Eigen::MatrixXd input_weights;  // L x d
    Eigen::VectorXd biases;         // L
    std::uint64_t seed = 0;

    static RandomFeatureMap make(int hidden, int input_dim, std::uint64_t seed);
    int hidden() const { return static_cast<int>(biases.size()); }
};

// H(j,l) = sigmoid(w_l . x_j + b_l), entries in (0,1).
Eigen::MatrixXd elm_features(const Eigen::MatrixXd& X, const RandomFeatureMap& map);

// Single-hidden-layer network with sigmoid units and a linear output.
struct SmallNet {
    Eigen::MatrixXd hidden_weights;  // h x d
    Eigen::VectorXd hidden_biases;   // h
    Eigen::VectorXd output_weights;  // h
    double output_bias = 0.0;

    // Uniform [-0.5, 0.5] parameters, 6 hidden units.
    static SmallNet random_init(int input_dim, std::uint64_t seed);
    int hidden() const { return static_cast<int>(hidden_biases.size()); }
};

double net_forward(const SmallNet& net, const Eigen::VectorXd& window);
Eigen::VectorXd net_predict(const SmallNet& net, const Eigen::MatrixXd& windows);

struct NetTrainOpt {
    double step_size = 1.0;
    int epochs = 2000;         // full passes over the data in either mode
    std::uint64_t seed = 0;    // shuffle stream for per-sample mode; full-batch ignores it
    bool per_sample = false;   // update after every sample, shuffled order per pass
};

// Step-size normalizer for per-sample multi-kernel training: the raw error
// gradient psi(e)*e - zeta(e) has slope sum_i lambda_i/sigma_i^2 *
// kappa_{sigma_i}(c_i) * (1 - c_i^2/sigma_i^2) at e = 0, which varies wildly
// with the kernel widths. Scaling it by 2/slope matches the squared-error
// gradient 2e near zero so one step size works across criteria; the tails
// still saturate, which is the robustness mechanism.
double mkc_slope_scale(const MkcParams& params);

// Gradient ascent on the sample multi-kernel correntropy of the errors.
// Full-batch by default; per-sample mode applies mkc_slope_scale to each
// update. Returns the trained net; throws DivergenceError when the loss
// leaves the finite range.
SmallNet net_train_mkc(const SmallNet& net, const Eigen::MatrixXd& windows,
                       const Eigen::VectorXd& targets, const MkcParams& params,
                       const NetTrainOpt& opt);

// Baseline trained by the same loop on the negative mean squared error.
SmallNet net_train_mse(const SmallNet& net, const Eigen::MatrixXd& windows,
                       const Eigen::VectorXd& targets, const NetTrainOpt& opt);

}  // namespace mkc
