#include "mkc/param_select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mkc/linalg.hpp"
#include "mkc/rng.hpp"

namespace mkc {

namespace {

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + n / 2;
    std::nth_element(v.begin(), mid, v.end());
    double hi = *mid;
    if (n % 2 == 1)
        return hi;
    std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
    return 0.5 * (v[n / 2 - 1] + hi);
}

double mad_scale(const VectorXd& e) {
    std::vector<double> v(e.data(), e.data() + e.size());
    const double med = median_of(v);
    for (double& x : v)
        x = std::abs(x - med);
    return 1.4826 * median_of(std::move(v));
}

// One k-means++ seeded Lloyd run; returns WCSS, centers in `c`.
double lloyd_once(const std::vector<double>& x, int m, std::mt19937_64& rng,
                  std::vector<double>& c) {
    const std::size_t n = x.size();
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    c.clear();
    c.push_back(x[static_cast<std::size_t>(unit(rng) * static_cast<double>(n)) % n]);
    std::vector<double> d2(n);
    for (int k = 1; k < m; ++k) {
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double best = std::numeric_limits<double>::infinity();
            for (double ci : c)
                best = std::min(best, (x[j] - ci) * (x[j] - ci));
            d2[j] = best;
            total += best;
        }
        if (total <= 0.0) {
            c.push_back(x[static_cast<std::size_t>(unit(rng) * static_cast<double>(n)) % n]);
            continue;
        }
        double r = unit(rng) * total, acc = 0.0;
        std::size_t pick = n - 1;
        for (std::size_t j = 0; j < n; ++j) {
            acc += d2[j];
            if (acc >= r) {
                pick = j;
                break;
            }
        }
        c.push_back(x[pick]);
    }

    std::vector<int> assign(n, -1);
    std::vector<double> sum(m);
    std::vector<int> cnt(m);
    for (int iter = 0; iter < 200; ++iter) {
        bool changed = false;
        std::fill(sum.begin(), sum.end(), 0.0);
        std::fill(cnt.begin(), cnt.end(), 0);
        for (std::size_t j = 0; j < n; ++j) {
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i) {
                const double d = (x[j] - c[i]) * (x[j] - c[i]);
                if (d < bd) {
                    bd = d;
                    best = i;
                }
            }
            if (assign[j] != best) {
                assign[j] = best;
                changed = true;
            }
            sum[best] += x[j];
            cnt[best] += 1;
        }
        for (int i = 0; i < m; ++i) {
            if (cnt[i] > 0) {
                c[i] = sum[i] / cnt[i];
            } else {
                // empty-cluster repair: reseed at the point farthest from
                // its current center
                std::size_t far = 0;
                double fd = -1.0;
                for (std::size_t j = 0; j < n; ++j) {
                    const double d = (x[j] - c[assign[j]]) * (x[j] - c[assign[j]]);
                    if (d > fd) {
                        fd = d;
                        far = j;
                    }
                }
                c[i] = x[far];
                changed = true;
            }
        }
        if (!changed)
            break;
    }
    double wcss = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double bd = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i)
            bd = std::min(bd, (x[j] - c[i]) * (x[j] - c[i]));
        wcss += bd;
    }
    return wcss;
}

} // namespace

std::vector<double> ParamSelectConfig::effective_grid() const {
    if (!sigma_grid.empty())
        return sigma_grid;
    std::vector<double> g;
    for (int i = 0; i < 10; ++i)
        g.push_back(0.1 + 0.2 * i);
    return g;
}

VectorXd kmeans_1d(const VectorXd& errors, int m, std::uint64_t seed,
                   int restarts) {
    validate_errors(errors);
    if (m < 1)
        throw InvalidParamError("kmeans_1d: m must be >= 1");
    if (restarts < 1)
        throw InvalidParamError("kmeans_1d: restarts must be >= 1");
    std::vector<double> x(errors.data(), errors.data() + errors.size());
    {
        std::vector<double> uniq = x;
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        if (static_cast<int>(uniq.size()) < m)
            throw DegenerateInputError(
                "kmeans_1d: fewer distinct values than clusters");
    }
    auto rng = make_rng(seed);
    std::vector<double> best, cand;
    double best_wcss = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        const double w = lloyd_once(x, m, rng, cand);
        if (w < best_wcss) {
            best_wcss = w;
            best = cand;
        }
    }
    std::sort(best.begin(), best.end());
    return Eigen::Map<VectorXd>(best.data(), static_cast<Eigen::Index>(best.size()));
}

GramMatrix gram_matrix(const VectorXd& c, const VectorXd& sigma) {
    if (c.size() != sigma.size())
        throw ShapeError("gram_matrix: centers/sigmas lengths differ");
    if ((sigma.array() <= 0.0).any())
        throw InvalidParamError("gram_matrix: sigma must be > 0");
    const auto m = c.size();
    MatrixXd K(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i; j < m; ++j) {
            const double s2 = sigma[i] * sigma[i] + sigma[j] * sigma[j];
            const double d = c[i] - c[j];
            const double v = std::exp(-d * d / (2.0 * s2)) /
                             std::sqrt(2.0 * std::numbers::pi * s2);
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return GramMatrix{std::move(K)};
}

VectorXd h_vector(const VectorXd& errors, const VectorXd& c,
                  const VectorXd& sigma) {
    validate_errors(errors);
    if (c.size() != sigma.size())
        throw ShapeError("h_vector: centers/sigmas lengths differ");
    const auto m = c.size();
    VectorXd h(m);
    constexpr double inv_sqrt_2pi = 0.3989422804014326779;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double s = sigma[i];
        if (!(s > 0.0))
            throw InvalidParamError("h_vector: sigma must be > 0");
        h[i] = (-(errors.array() - c[i]).square() / (2.0 * s * s)).exp().sum() *
               inv_sqrt_2pi / s / static_cast<double>(errors.size());
    }
    return h;
}

VectorXd solve_lambda(const GramMatrix& K, const VectorXd& h, double eta) {
    if (K.entries.rows() != K.entries.cols() || K.entries.rows() != h.size())
        throw ShapeError("solve_lambda: dimension mismatch");
    if (!(eta >= 0.0))
        throw InvalidParamError("solve_lambda: eta must be >= 0");
    MatrixXd A = K.entries;
    A.diagonal().array() += eta;
    return detail::solve_sym(A, h, eta == 0.0);
}

double u_hat(const VectorXd& lambda, const GramMatrix& K, const VectorXd& h) {
    if (K.entries.rows() != K.entries.cols() || lambda.size() != h.size() ||
        lambda.size() != K.entries.rows())
        throw ShapeError("u_hat: dimension mismatch");
    return -0.5 * lambda.dot(K.entries * lambda) + lambda.dot(h);
}

VectorXd select_bandwidths(const VectorXd& errors, const VectorXd& c,
                           const ParamSelectConfig& config) {
    validate_errors(errors);
    const auto grid = config.effective_grid();
    if (grid.empty())
        throw ConfigError("select_bandwidths: empty sigma grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0))
            throw ConfigError("select_bandwidths: grid values must be > 0");
        if (i > 0 && grid[i] <= grid[i - 1])
            throw ConfigError("select_bandwidths: grid must be strictly ascending");
    }
    if (config.sweeps < 1)
        throw ConfigError("select_bandwidths: sweeps must be >= 1");
    const auto m = c.size();

    // Starting bandwidth: configured value, else the robust MAD scale,
    // snapped to the nearest grid entry so the incumbent is always on grid.
    double s0 = config.sigma_init > 0.0 ? config.sigma_init : mad_scale(errors);
    double snapped = grid.front();
    for (double g : grid)
        if (std::abs(g - s0) < std::abs(snapped - s0))
            snapped = g;
    VectorXd sigma = VectorXd::Constant(m, snapped);

    for (int sweep = 0; sweep < config.sweeps; ++sweep) {
        for (Eigen::Index i = 0; i < m; ++i) {
            double best_u = -std::numeric_limits<double>::infinity();
            double best_s = sigma[i];
            VectorXd cand = sigma;
            for (double g : grid) { // ascending: ties keep the smaller sigma
                cand[i] = g;
                const GramMatrix K = gram_matrix(c, cand);
                const VectorXd h = h_vector(errors, c, cand);
                const VectorXd lam = solve_lambda(K, h, config.eta);
                const double u = u_hat(lam, K, h);
                if (u > best_u + 1e-12) {
                    best_u = u;
                    best_s = g;
                }
            }
            sigma[i] = best_s;
        }
    }
    return sigma;
}

MkcParams determine_params(const VectorXd& errors,
                           const ParamSelectConfig& config) {
    validate_errors(errors);
    if (config.m < 1)
        throw InvalidParamError("determine_params: m must be >= 1");

    // Robust window for center determination only; the density fit below
    // still sees every sample.
    VectorXd for_centers = errors;
    if (config.center_trim_mad > 0.0) {
        std::vector<double> v(errors.data(), errors.data() + errors.size());
        const double med = median_of(v);
        const double w = config.center_trim_mad * mad_scale(errors);
        std::vector<double> kept;
        kept.reserve(v.size());
        for (double x : v)
            if (std::abs(x - med) <= w)
                kept.push_back(x);
        std::vector<double> uniq = kept;
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        if (static_cast<int>(uniq.size()) >= config.m)
            for_centers = Eigen::Map<VectorXd>(kept.data(),
                                               static_cast<Eigen::Index>(kept.size()));
    }

    const VectorXd c = kmeans_1d(for_centers, config.m, config.kmeans_seed,
                                 config.kmeans_restarts);
    const VectorXd sigma = select_bandwidths(errors, c, config);
    const GramMatrix K = gram_matrix(c, sigma);
    const VectorXd h = h_vector(errors, c, sigma);
    const VectorXd lambda = solve_lambda(K, h, config.eta);
    return MkcParams(lambda, c, sigma, /*simplex_mode=*/false);
}

} // namespace mkc
