#include "mkc/solver.hpp"

#include <cmath>

#include "mkc/linalg.hpp"

namespace mkc {

LipProblem::LipProblem(MatrixXd H, VectorXd T, double gamma_prime)
    : features(std::move(H)), targets(std::move(T)),
      reg_gamma_prime(gamma_prime) {
    if (features.rows() < 1 || features.cols() < 1)
        throw InvalidParamError("LipProblem: need N >= 1 and L >= 1");
    if (targets.size() != features.rows())
        throw ShapeError("LipProblem: |targets| != rows(features)");
    if (!features.allFinite() || !targets.allFinite())
        throw InvalidParamError("LipProblem: non-finite entries");
    if (!(reg_gamma_prime >= 0.0))
        throw InvalidParamError("LipProblem: gamma' must be >= 0");
}

double default_gamma_prime(const MatrixXd& H, double rel) {
    return rel * H.array().square().sum() / static_cast<double>(H.cols());
}

namespace {

// psi(e_j) and zeta(e_j) for a whole residual vector, component-wise over
// the mixture so the exp() calls vectorize.
void psi_zeta_vec(const VectorXd& e, const MkcParams& params, VectorXd& psi,
                  VectorXd& zeta) {
    psi.setZero(e.size());
    zeta.setZero(e.size());
    constexpr double inv_sqrt_2pi = 0.3989422804014326779;
    for (int i = 0; i < params.m(); ++i) {
        const double s = params.sigmas[i];
        const double w = params.lambdas[i] / (s * s) * inv_sqrt_2pi / s;
        Eigen::ArrayXd k =
            (-(e.array() - params.centers[i]).square() / (2.0 * s * s)).exp() * w;
        psi.array() += k;
        zeta.array() += k * params.centers[i];
    }
}

} // namespace

double objective_J(const VectorXd& beta, const LipProblem& problem,
                   const MkcParams& params) {
    if (beta.size() != problem.l())
        throw ShapeError("objective_J: beta length != L");
    const VectorXd e = problem.targets - problem.features * beta;
    const double n = static_cast<double>(problem.n());
    const double gamma = problem.reg_gamma_prime / (2.0 * n);
    return mkc_estimate(e, params) - gamma * beta.squaredNorm();
}

VectorXd objective_gradient(const VectorXd& beta, const LipProblem& problem,
                            const MkcParams& params) {
    if (beta.size() != problem.l())
        throw ShapeError("objective_gradient: beta length != L");
    const VectorXd e = problem.targets - problem.features * beta;
    VectorXd psi, zeta;
    psi_zeta_vec(e, params, psi, zeta);
    const VectorXd g = psi.array() * e.array() - zeta.array();
    const double n = static_cast<double>(problem.n());
    return (problem.features.transpose() * g - problem.reg_gamma_prime * beta) / n;
}

VectorXd mmkcc_fixed_point_step(const VectorXd& beta_prev,
                                const LipProblem& problem,
                                const MkcParams& params) {
    if (beta_prev.size() != problem.l())
        throw ShapeError("mmkcc_fixed_point_step: beta length != L");
    const MatrixXd& H = problem.features;
    const VectorXd e = problem.targets - H * beta_prev;
    VectorXd psi, zeta;
    psi_zeta_vec(e, params, psi, zeta);
    MatrixXd A = H.transpose() * psi.asDiagonal() * H;
    A.diagonal().array() += problem.reg_gamma_prime;
    const VectorXd b =
        H.transpose() * (psi.array() * problem.targets.array()).matrix() -
        H.transpose() * zeta;
    return detail::solve_sym(A, b, problem.reg_gamma_prime == 0.0);
}

FitReport fit_mmkcc(const LipProblem& problem, const MkcParams& params,
                    const SolverConfig& config) {
    if (config.max_iters < 1)
        throw InvalidParamError("SolverConfig: K must be >= 1");
    if (!(config.tolerance > 0.0))
        throw InvalidParamError("SolverConfig: xi must be > 0");
    VectorXd beta = config.initial_weights.size() == 0
                        ? VectorXd::Zero(problem.l()).eval()
                        : config.initial_weights;
    if (beta.size() != problem.l())
        throw ShapeError("SolverConfig: initial_weights length != L");

    FitReport report;
    double j_prev = objective_J(beta, problem, params);
    for (int k = 1; k <= config.max_iters; ++k) {
        beta = mmkcc_fixed_point_step(beta, problem, params);
        const double j = objective_J(beta, problem, params);
        if (!std::isfinite(j))
            throw DivergenceError("fit_mmkcc: non-finite objective at iteration " +
                                  std::to_string(k));
        report.objective_trace.push_back(j);
        report.iterations_used = k;
        if (std::abs(j - j_prev) < config.tolerance) {
            report.converged = true;
            break;
        }
        j_prev = j;
    }
    report.weights = std::move(beta);
    return report;
}

VectorXd fit_mse(const LipProblem& problem) {
    const MatrixXd& H = problem.features;
    MatrixXd A = H.transpose() * H;
    A.diagonal().array() += problem.reg_gamma_prime;
    const VectorXd b = H.transpose() * problem.targets;
    return detail::solve_sym(A, b, problem.reg_gamma_prime == 0.0);
}

} // namespace mkc
