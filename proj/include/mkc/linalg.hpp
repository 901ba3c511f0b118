#pragma once

#include <Eigen/Dense>

#include "mkc/errors.hpp"

namespace mkc::detail {

/// Solve a (near-)symmetric system A x = b: LDLT first, pivoted LU fallback,
/// never an explicit inverse. `reg_is_zero` selects the error message that
/// advises regularization.
inline Eigen::VectorXd solve_sym(const Eigen::MatrixXd& A,
                                 const Eigen::VectorXd& b, bool reg_is_zero) {
    const double scale = A.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff() + 1.0;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() == Eigen::Success) {
        Eigen::VectorXd x = ldlt.solve(b);
        if (x.allFinite() && (A * x - b).cwiseAbs().maxCoeff() <= 1e-8 * scale)
            return x;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.isInvertible()) {
        Eigen::VectorXd x = lu.solve(b);
        if (x.allFinite())
            return x;
    }
    if (reg_is_zero)
        throw SingularSystemError(
            "linear system singular; set the regularizer > 0");
    throw SingularSystemError("regularized system could not be solved");
}

} // namespace mkc::detail
