#pragma once

#include <cstdint>
#include <vector>

#include "mkc/kernel.hpp"

namespace mkc {

/// Configuration of the free-parameter determination pipeline.
///
/// `center_trim_mad` bounds the samples used for *center* determination to a
/// robust window median +/- k * 1.4826 * MAD before clustering (0 disables).
/// Gross outliers otherwise dominate the within-cluster sum of squares and
/// k-means parks a center on the outlier tail instead of the main error
/// modes; bandwidths and mixture coefficients are still fitted on the full
/// sample so the outlier mass is represented in the density fit.
struct ParamSelectConfig {
    int m = 2;
    double eta = 1e-4;
    std::vector<double> sigma_grid; // empty => default 0.1, 0.3, ..., 1.9
    int sweeps = 3;
    double sigma_init = 0.0; // <= 0 => robust MAD scale snapped into the grid
    std::uint64_t kmeans_seed = 0;
    int kmeans_restarts = 8;
    double center_trim_mad = 4.0;

    /// Grid actually used (fills in the default when none was given).
    std::vector<double> effective_grid() const;
};

/// Symmetric m x m matrix of pairwise integrals of the mixture's Gaussian
/// components (the quadratic form of the density-fit objective).
struct GramMatrix {
    MatrixXd entries;
};

/// Lloyd's algorithm with k-means++ seeding, best of `restarts` by
/// within-cluster sum of squares; centers returned ascending.
VectorXd kmeans_1d(const VectorXd& errors, int m, std::uint64_t seed,
                   int restarts);

/// K(i,j) = 1/sqrt(2*pi*(s_i^2+s_j^2)) * exp(-(c_i-c_j)^2/(2*(s_i^2+s_j^2))),
/// the Gaussian convolution identity for int kappa_i * kappa_j.
GramMatrix gram_matrix(const VectorXd& c, const VectorXd& sigma);

/// h_i = (1/N) sum_j kappa_{sigma_i}(e_j - c_i).
VectorXd h_vector(const VectorXd& errors, const VectorXd& c,
                  const VectorXd& sigma);

/// Solve (K + eta I) lambda = h; lambda is sign-unconstrained.
VectorXd solve_lambda(const GramMatrix& K, const VectorXd& h, double eta);

/// Density-fit objective -0.5 lambda' K lambda + lambda' h.
double u_hat(const VectorXd& lambda, const GramMatrix& K, const VectorXd& h);

/// Coordinate ascent over the bandwidth grid: `sweeps` passes, each setting
/// sigma_i to the grid argmax of u_hat at the regularized lambda solution.
/// Ties within 1e-12 resolve to the smaller bandwidth.
VectorXd select_bandwidths(const VectorXd& errors, const VectorXd& c,
                           const ParamSelectConfig& config);

/// Full pipeline: centers by k-means (robust window, see config), bandwidths
/// by coordinate ascent, coefficients by the regularized solve. Returns
/// unconstrained-mode parameters.
MkcParams determine_params(const VectorXd& errors,
                           const ParamSelectConfig& config);

} // namespace mkc
