#pragma once

#include <vector>

#include "mkc/kernel.hpp"

namespace mkc {

/// A linear-in-parameter regression problem: target T approximated by H*beta.
/// reg_gamma_prime is the gamma' of the regularized normal equations
/// (gamma' = 2*N*gamma in terms of the objective's gamma).
struct LipProblem {
    MatrixXd features; // N x L, row j = h_j
    VectorXd targets;  // length N
    double reg_gamma_prime = 0.0;

    LipProblem(MatrixXd H, VectorXd T, double gamma_prime);

    Eigen::Index n() const { return features.rows(); }
    Eigen::Index l() const { return features.cols(); }
};

/// Default gamma' used by the benchmark harness: rel * trace(H'H) / L.
double default_gamma_prime(const MatrixXd& H, double rel = 1e-6);

struct SolverConfig {
    int max_iters = 10;       // K
    double tolerance = 1e-6;  // xi
    VectorXd initial_weights; // empty means all-zero of length L

    SolverConfig() = default;
    SolverConfig(int K, double xi) : max_iters(K), tolerance(xi) {}
};

struct FitReport {
    VectorXd weights;
    std::vector<double> objective_trace; // J(beta_k), k = 1..iterations_used
    int iterations_used = 0;
    bool converged = false;
};

/// J(beta) = (1/N) sum_j sum_i lambda_i kappa_{sigma_i}(e_j - c_i)
///           - gamma * ||beta||^2   with gamma = gamma'/(2N).
double objective_J(const VectorXd& beta, const LipProblem& problem,
                   const MkcParams& params);

/// Analytic gradient of objective_J with respect to beta:
/// (1/N) sum_j [psi(e_j) e_j - zeta(e_j)] h_j - (gamma'/N) beta.
VectorXd objective_gradient(const VectorXd& beta, const LipProblem& problem,
                            const MkcParams& params);

/// One fixed-point step: solve (H' Lambda H + gamma' I) beta = H' Lambda T - H' theta
/// with Lambda_jj = psi(e_j), theta_j = zeta(e_j), e from beta_prev.
VectorXd mmkcc_fixed_point_step(const VectorXd& beta_prev,
                                const LipProblem& problem,
                                const MkcParams& params);

/// Fixed-point iteration from beta_0 (default zero) with early stop on
/// |J_k - J_{k-1}| < tolerance.
FitReport fit_mmkcc(const LipProblem& problem, const MkcParams& params,
                    const SolverConfig& config);

/// Closed-form ridge baseline: (H'H + gamma' I) beta = H'T.
VectorXd fit_mse(const LipProblem& problem);

} // namespace mkc
