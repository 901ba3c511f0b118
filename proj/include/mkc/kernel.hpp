#pragma once

#include <Eigen/Dense>

#include "mkc/errors.hpp"

namespace mkc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Free parameters of the multi-kernel correntropy criterion: mixture
/// coefficients lambda_i, kernel centers c_i and bandwidths sigma_i,
/// all of common length m.
///
/// Two construction modes exist. Simplex mode enforces the definition-side
/// convention (lambda on the probability simplex); unconstrained mode is
/// what the parameter-determination pipeline produces, where lambda solves
/// a regularized linear system and carries no sign constraint.
struct MkcParams {
    VectorXd lambdas;
    VectorXd centers;
    VectorXd sigmas;
    bool simplex = false;

    MkcParams(VectorXd lam, VectorXd c, VectorXd sig, bool simplex_mode = false);

    int m() const { return static_cast<int>(lambdas.size()); }

    /// Convenience: single zero-centered kernel (plain correntropy).
    static MkcParams single(double sigma);
    /// Convenience: zero-centered mixture (mixture correntropy).
    static MkcParams mixture(const VectorXd& lambdas, const VectorXd& sigmas);
};

/// Throws EmptyInputError / InvalidParamError unless `errors` is a non-empty
/// vector of finite values.
void validate_errors(const VectorXd& errors);

/// Gaussian density kernel (1/(sqrt(2*pi)*sigma)) * exp(-e^2/(2*sigma^2)).
double gaussian_kernel(double e, double sigma);

/// Sample correntropy (1/N) * sum_i kappa_sigma(e_i).
double correntropy_estimate(const VectorXd& errors, double sigma);

/// Correntropy induced metric sqrt(kappa(0) - V(x,y)).
double cim(const VectorXd& x, const VectorXd& y, double sigma);

/// Sample multi-kernel correntropy
/// (1/N) * sum_j sum_i lambda_i * kappa_{sigma_i}(e_j - c_i).
double mkc_estimate(const VectorXd& errors, const MkcParams& params);

/// psi(e) = sum_i (lambda_i / sigma_i^2) * kappa_{sigma_i}(e - c_i),
/// the residual weight of the fixed-point step.
double psi_weight(double e, const MkcParams& params);

/// zeta(e) = sum_i (lambda_i * c_i / sigma_i^2) * kappa_{sigma_i}(e - c_i),
/// the center-pull term of the fixed-point step.
double zeta_weight(double e, const MkcParams& params);

} // namespace mkc
