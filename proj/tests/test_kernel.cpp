#include <doctest.h>

#include <cmath>
#include <random>

#include "mkc/kernel.hpp"
#include "mkc/rng.hpp"

using namespace mkc;

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;

VectorXd vec(std::initializer_list<double> xs) {
    VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

// Random simplex-mode params with m components.
MkcParams random_simplex_params(int m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::uniform_real_distribution<double> uc(-2.0, 2.0);
    VectorXd lam(m), c(m), s(m);
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
        lam[i] = u(rng);
        sum += lam[i];
        c[i] = uc(rng);
        s[i] = 0.2 + u(rng);
    }
    lam /= sum;
    // Renormalize exactly enough for the simplex check.
    lam[m - 1] = 1.0 - lam.head(m - 1).sum();
    return MkcParams(lam, c, s, true);
}

} // namespace

TEST_CASE("gaussian_kernel: frozen values") {
    CHECK(gaussian_kernel(0.0, 1.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
    CHECK(gaussian_kernel(1.0, 1.0) == doctest::Approx(0.2419707245191434).epsilon(1e-12));
    CHECK(gaussian_kernel(2.0, 0.5) == doctest::Approx(2.6766045152977074e-4).epsilon(1e-12));
    CHECK(gaussian_kernel(-1.0, 1.0) == gaussian_kernel(1.0, 1.0)); // even
}

TEST_CASE("gaussian_kernel: domain errors") {
    CHECK_THROWS_AS(gaussian_kernel(0.0, 0.0), InvalidParamError);
    CHECK_THROWS_AS(gaussian_kernel(0.0, -1.0), InvalidParamError);
    CHECK_THROWS_AS(gaussian_kernel(std::nan(""), 1.0), InvalidParamError);
}

TEST_CASE("correntropy_estimate: frozen values and errors") {
    CHECK(correntropy_estimate(vec({0, 0, 0}), 1.0) ==
          doctest::Approx(0.3989422804014327).epsilon(1e-12));
    CHECK(correntropy_estimate(vec({1, -1}), 1.0) ==
          doctest::Approx(0.2419707245191434).epsilon(1e-12));
    CHECK(correntropy_estimate(vec({0, 2}), 0.5) ==
          doctest::Approx(0.3990761106271976).epsilon(1e-12));
    CHECK_THROWS_AS(correntropy_estimate(VectorXd(), 1.0), EmptyInputError);
    CHECK_THROWS_AS(correntropy_estimate(vec({0.0}), 0.0), InvalidParamError);
}

TEST_CASE("cim: frozen values, symmetry, shape error") {
    VectorXd x = vec({0.3, -1.2, 4.0});
    CHECK(cim(x, x, 1.0) == 0.0);
    CHECK(cim(vec({0}), vec({1}), 1.0) ==
          doctest::Approx(0.39619636025876026).epsilon(1e-12));
    CHECK(cim(vec({0, 0}), vec({3, -3}), 1.0) == cim(vec({0, 0}), vec({-3, 3}), 1.0));
    CHECK_THROWS_AS(cim(vec({0, 0}), vec({1}), 1.0), ShapeError);
}

TEST_CASE("cim: metric premises on random triples (triangle not asserted)") {
    auto rng = make_rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int t = 0; t < 50; ++t) {
        VectorXd a(4), b(4);
        for (int i = 0; i < 4; ++i) {
            a[i] = u(rng);
            b[i] = u(rng);
        }
        const double d = cim(a, b, 0.8);
        CHECK(d >= 0.0);
        CHECK(d == cim(b, a, 0.8));
    }
    // identity of indiscernibles at sample level: d > 0 when vectors differ
    CHECK(cim(vec({0, 0}), vec({0, 1e-3}), 1.0) > 0.0);
}

TEST_CASE("mkc_estimate: m=1 reduces to correntropy_estimate") {
    auto rng = make_rng(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    VectorXd e(17);
    for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = u(rng);
    for (double s : {0.3, 1.0, 2.5}) {
        const double a = mkc_estimate(e, MkcParams::single(s));
        const double b = correntropy_estimate(e, s);
        CHECK(a == doctest::Approx(b).epsilon(1e-14));
    }
}

TEST_CASE("mkc_estimate: zero centers reduce to the mixture estimator") {
    VectorXd e = vec({0.4, -1.1, 2.0, 0.0});
    VectorXd lam = vec({0.3, 0.7});
    VectorXd sig = vec({0.5, 1.5});
    const double mix = mkc_estimate(e, MkcParams::mixture(lam, sig));
    double by_hand = 0.0;
    for (int i = 0; i < 2; ++i)
        by_hand += lam[i] * correntropy_estimate(e, sig[i]);
    CHECK(mix == doctest::Approx(by_hand).epsilon(1e-14));
}

TEST_CASE("mkc_estimate: frozen off-center value") {
    MkcParams p(vec({0.5, 0.5}), vec({-1, 2}), vec({0.5, 1.5}));
    CHECK(mkc_estimate(vec({0}), p) ==
          doctest::Approx(0.10866099140518595).epsilon(1e-12));
    CHECK_THROWS_AS(mkc_estimate(VectorXd(), p), EmptyInputError);
}

TEST_CASE("mkc_estimate: Property 1 bound over randomized simplex params") {
    auto rng = make_rng(7);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int t = 0; t < 40; ++t) {
        const int m = 1 + static_cast<int>(t % 3);
        MkcParams p = random_simplex_params(m, rng);
        VectorXd e(23);
        for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = u(rng);
        const double v = mkc_estimate(e, p);
        double bound = 0.0;
        for (int i = 0; i < m; ++i) bound += p.lambdas[i] * kInvSqrt2Pi / p.sigmas[i];
        CHECK(v > 0.0);
        CHECK(v <= bound + 1e-15);
    }
}

TEST_CASE("mkc_estimate: Property 2 even-moment truncation at sigma = 1") {
    // kappa_1(x) = inv_sqrt_2pi * sum_k (-x^2/2)^k / k!; truncate at k <= 20.
    auto series = [](double x) {
        double term = kInvSqrt2Pi, acc = kInvSqrt2Pi;
        for (int k = 1; k <= 20; ++k) {
            term *= -0.5 * x * x / k;
            acc += term;
        }
        return acc;
    };
    MkcParams p(vec({0.4, 0.6}), vec({-0.5, 1.0}), vec({1.0, 1.0}));
    VectorXd e = vec({-1.0, 0.3, 1.4, 0.9, -0.2});
    for (Eigen::Index j = 0; j < e.size(); ++j)
        for (int i = 0; i < p.m(); ++i)
            REQUIRE(std::abs(e[j] - p.centers[i]) <= 2.0);
    double truncated = 0.0;
    for (Eigen::Index j = 0; j < e.size(); ++j)
        for (int i = 0; i < p.m(); ++i)
            truncated += p.lambdas[i] * series(e[j] - p.centers[i]);
    truncated /= static_cast<double>(e.size());
    CHECK(std::abs(truncated - mkc_estimate(e, p)) <= 1e-9);
}

TEST_CASE("mkc_estimate: Property 3 large-bandwidth expansion") {
    auto rng = make_rng(19);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VectorXd e(400);
    for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = u(rng);
    MkcParams p(vec({0.5, 0.5}), vec({0.2, -0.4}), vec({50.0, 80.0}), true);
    const double v = mkc_estimate(e, p);
    double approx = 0.0;
    for (int i = 0; i < p.m(); ++i) {
        const double s = p.sigmas[i];
        const double m2 = (e.array() - p.centers[i]).square().mean();
        approx += p.lambdas[i] * kInvSqrt2Pi / s * (1.0 - m2 / (2.0 * s * s));
    }
    CHECK(std::abs(v - approx) <= 1e-6 * v);
}

TEST_CASE("mkc_estimate: Property 4 small-bandwidth density limit") {
    // 1e5 standard-normal samples; narrow kernels evaluate the density at c_i.
    auto rng = make_rng(23);
    std::normal_distribution<double> n01(0.0, 1.0);
    VectorXd e(100000);
    for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = n01(rng);
    MkcParams p(vec({0.5, 0.5}), vec({-1.0, 0.5}), vec({0.05, 0.05}), true);
    auto pdf = [](double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); };
    const double expect = 0.5 * pdf(-1.0) + 0.5 * pdf(0.5);
    CHECK(std::abs(mkc_estimate(e, p) - expect) <= 0.02);
}

TEST_CASE("psi_weight / zeta_weight: frozen values") {
    CHECK(psi_weight(0.0, MkcParams::single(1.0)) ==
          doctest::Approx(0.3989422804014327).epsilon(1e-12));
    CHECK(psi_weight(0.0, MkcParams::single(2.0)) ==
          doctest::Approx(0.04986778505017909).epsilon(1e-12));
    MkcParams shifted(vec({1.0}), vec({1.0}), vec({1.0}));
    CHECK(zeta_weight(0.0, shifted) ==
          doctest::Approx(0.2419707245191434).epsilon(1e-12));
}

TEST_CASE("zeta_weight: vanishes for zero centers, ratio recovers the center") {
    MkcParams zero = MkcParams::mixture(vec({0.5, 0.5}), vec({0.5, 1.5}));
    for (double e : {-2.0, 0.0, 0.7, 3.1}) CHECK(zeta_weight(e, zero) == 0.0);
    MkcParams one(vec({0.8}), vec({1.7}), vec({0.9}));
    for (double e : {-1.0, 0.2, 2.4})
        CHECK(zeta_weight(e, one) / psi_weight(e, one) ==
              doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("MkcParams: construction guards") {
    CHECK_THROWS_AS(MkcParams(vec({1, 1}), vec({0}), vec({1, 1})), ShapeError);
    CHECK_THROWS_AS(MkcParams(vec({1}), vec({0}), vec({0.0})), InvalidParamError);
    CHECK_THROWS_AS(MkcParams(vec({1}), vec({0}), vec({-2.0})), InvalidParamError);
    CHECK_THROWS_AS(MkcParams(VectorXd(), VectorXd(), VectorXd()), InvalidParamError);
    // simplex mode: negative weight and bad sum rejected
    CHECK_THROWS_AS(MkcParams(vec({-0.5, 1.5}), vec({0, 0}), vec({1, 1}), true),
                    InvalidParamError);
    CHECK_THROWS_AS(MkcParams(vec({0.5, 0.6}), vec({0, 0}), vec({1, 1}), true),
                    InvalidParamError);
    // unconstrained mode allows signed weights
    CHECK_NOTHROW(MkcParams(vec({-0.5, 1.5}), vec({0, 0}), vec({1, 1})));
    CHECK(MkcParams::single(2.0).m() == 1);
    CHECK(MkcParams::mixture(vec({0.5, 0.5}), vec({1, 2})).m() == 2);
}

TEST_CASE("validate_errors: NaN policy") {
    VectorXd bad = vec({0.0, 1.0});
    bad[1] = std::nan("");
    CHECK_THROWS_AS(validate_errors(bad), InvalidParamError);
    CHECK_THROWS_AS(validate_errors(VectorXd()), EmptyInputError);
    CHECK_NOTHROW(validate_errors(vec({0.0})));
}
