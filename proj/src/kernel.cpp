#include "mkc/kernel.hpp"

#include <cmath>
#include <numbers>

namespace mkc {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779; // 1/sqrt(2*pi)
} // namespace

MkcParams::MkcParams(VectorXd lam, VectorXd c, VectorXd sig, bool simplex_mode)
    : lambdas(std::move(lam)), centers(std::move(c)), sigmas(std::move(sig)),
      simplex(simplex_mode) {
    const auto n = lambdas.size();
    if (n < 1)
        throw InvalidParamError("MkcParams: m must be >= 1");
    if (centers.size() != n || sigmas.size() != n)
        throw ShapeError("MkcParams: lambdas/centers/sigmas lengths differ");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(lambdas[i]) || !std::isfinite(centers[i]) ||
            !std::isfinite(sigmas[i]))
            throw InvalidParamError("MkcParams: non-finite entry");
        if (sigmas[i] <= 0.0)
            throw InvalidParamError("MkcParams: sigma must be > 0");
    }
    if (simplex) {
        if ((lambdas.array() < 0.0).any())
            throw InvalidParamError("MkcParams: simplex mode requires lambda >= 0");
        if (std::abs(lambdas.sum() - 1.0) > 1e-12)
            throw InvalidParamError("MkcParams: simplex mode requires sum(lambda) = 1");
    }
}

MkcParams MkcParams::single(double sigma) {
    return MkcParams(VectorXd::Ones(1), VectorXd::Zero(1),
                     VectorXd::Constant(1, sigma), true);
}

MkcParams MkcParams::mixture(const VectorXd& lambdas, const VectorXd& sigmas) {
    return MkcParams(lambdas, VectorXd::Zero(lambdas.size()), sigmas, true);
}

void validate_errors(const VectorXd& errors) {
    if (errors.size() == 0)
        throw EmptyInputError("error sample set is empty");
    if (!errors.allFinite())
        throw InvalidParamError("error sample contains NaN/Inf");
}

double gaussian_kernel(double e, double sigma) {
    if (!(sigma > 0.0))
        throw InvalidParamError("gaussian_kernel: sigma must be > 0");
    if (!std::isfinite(e))
        throw InvalidParamError("gaussian_kernel: e must be finite");
    const double z = e / sigma;
    return kInvSqrt2Pi / sigma * std::exp(-0.5 * z * z);
}

double correntropy_estimate(const VectorXd& errors, double sigma) {
    validate_errors(errors);
    if (!(sigma > 0.0))
        throw InvalidParamError("correntropy_estimate: sigma must be > 0");
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    double acc = (-errors.array().square() * inv2s2).exp().sum();
    return acc * kInvSqrt2Pi / sigma / static_cast<double>(errors.size());
}

double cim(const VectorXd& x, const VectorXd& y, double sigma) {
    if (x.size() != y.size())
        throw ShapeError("cim: x and y lengths differ");
    const double v = correntropy_estimate((x - y).eval(), sigma);
    const double peak = gaussian_kernel(0.0, sigma);
    // Clamp tiny negative round-off before the square root.
    return std::sqrt(std::max(0.0, peak - v));
}

double mkc_estimate(const VectorXd& errors, const MkcParams& params) {
    validate_errors(errors);
    double acc = 0.0;
    for (int i = 0; i < params.m(); ++i) {
        const double s = params.sigmas[i];
        const double inv2s2 = 1.0 / (2.0 * s * s);
        const double comp =
            (-(errors.array() - params.centers[i]).square() * inv2s2).exp().sum();
        acc += params.lambdas[i] * comp * kInvSqrt2Pi / s;
    }
    return acc / static_cast<double>(errors.size());
}

double psi_weight(double e, const MkcParams& params) {
    double acc = 0.0;
    for (int i = 0; i < params.m(); ++i) {
        const double s = params.sigmas[i];
        acc += params.lambdas[i] / (s * s) *
               gaussian_kernel(e - params.centers[i], s);
    }
    return acc;
}

double zeta_weight(double e, const MkcParams& params) {
    double acc = 0.0;
    for (int i = 0; i < params.m(); ++i) {
        const double s = params.sigmas[i];
        acc += params.lambdas[i] * params.centers[i] / (s * s) *
               gaussian_kernel(e - params.centers[i], s);
    }
    return acc;
}

} // namespace mkc
