// Acceptance harness: runs the ten pinned end-to-end checks and prints one
// [PASS]/[FAIL] line per criterion with the measured values. Exit status is
// the number of failed criteria.

#include <sys/wait.h>

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mkc/bench.hpp"
#include "mkc/datagen.hpp"
#include "mkc/kernel.hpp"
#include "mkc/param_select.hpp"
#include "mkc/rng.hpp"
#include "mkc/solver.hpp"

using namespace mkc;
namespace fs = std::filesystem;

namespace {

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

VectorXd vec(std::initializer_list<double> xs) {
    VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

// ---------------------------------------------------------------- criterion 1-3

ExperimentConfig table_config(int noise_case) {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::linear;
    cfg.noise_case = noise_case;
    cfg.runs = 100;
    cfg.n_samples = 400;
    cfg.schedule = Schedule::online;
    cfg.seed = 42;
    cfg.solver.max_iters = 10;
    cfg.mcc_sigma = 5.0;
    cfg.mmcc_sigmas = {5.0, 10.0};
    cfg.mmcc_lambdas = {0.5, 0.5};
    return cfg;
}

bool criterion1(std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    BenchResult res = run_experiment(table_config(1));
    const double el = seconds_since(t0);
    const double mse = res.mean_of(Criterion::mse), mcc = res.mean_of(Criterion::mcc);
    const double mmcc = res.mean_of(Criterion::mmcc), mmkcc = res.mean_of(Criterion::mmkcc);
    const bool order = mmkcc < mmcc && mmcc <= mcc && mcc < mse;
    detail = fmt("symmetric-mixture case, 100 runs: mean weight rmse mmkcc=%.4f mmcc=%.4f "
                 "mcc=%.4f mse=%.4f; need mmkcc<mmcc<=mcc<mse, mmkcc<=0.07, mse>=0.30, "
                 "<=300s (took %.0fs)",
                 mmkcc, mmcc, mcc, mse, el);
    return order && mmkcc <= 0.07 && mse >= 0.30 && el <= 300.0;
}

bool criterion2(std::string& detail) {
    ExperimentConfig cfg = table_config(2);
    cfg.param_select.center_trim_mad = 5.0;
    BenchResult res = run_experiment(cfg);
    const double mcc = res.mean_of(Criterion::mcc), mmkcc = res.mean_of(Criterion::mmkcc);
    detail = fmt("asymmetric-mixture case, 100 runs: mmkcc=%.4f (need <=0.05), "
                 "mcc/mmkcc=%.2f (need >=2)",
                 mmkcc, mcc / mmkcc);
    return mmkcc <= 0.05 && mcc >= 2.0 * mmkcc;
}

bool criterion3(std::string& detail) {
    ExperimentConfig cfg = table_config(3);
    cfg.solver.max_iters = 30;
    cfg.param_select.center_trim_mad = 2.5;
    cfg.mcc_sigma = 0.9;
    cfg.mmcc_sigmas = {0.9, 4.0};
    BenchResult res = run_experiment(cfg);
    const double mcc = res.mean_of(Criterion::mcc), mmcc = res.mean_of(Criterion::mmcc);
    const double mmkcc = res.mean_of(Criterion::mmkcc);
    const double gap = std::abs(mmkcc - mcc) / mcc;
    detail = fmt("heavy zero-mean mixture, 100 runs: mmkcc=%.4f mmcc=%.4f mcc=%.4f; "
                 "need mmkcc<=mmcc<=mcc and |mmkcc-mcc|/mcc=%.3f <= 0.25",
                 mmkcc, mmcc, mcc, gap);
    return mmkcc <= mmcc && mmcc <= mcc && gap <= 0.25;
}

// ---------------------------------------------------------------- criterion 4

double percentile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

bool criterion4(std::string& detail) {
    Dataset data = gen_linear_dataset(vec({1.0, 2.0}), 400, NoiseSpec::table_case(2),
                                      -2.0, 2.0, 42);
    const LipProblem problem(data.inputs, data.targets, default_gamma_prime(data.inputs));

    ParamSelectConfig ps;
    ps.center_trim_mad = 5.0;
    ps.kmeans_seed = 0xabc;
    VectorXd beta = VectorXd::Zero(2);
    beta = mmkcc_fixed_point_step(beta, problem, determine_params(data.targets, ps));
    VectorXd e1 = data.targets - data.inputs * beta;
    ps.kmeans_seed = 0xdef;
    MkcParams fitted = determine_params(e1, ps);

    // squared-distance quadrature between each candidate density and a fine
    // KDE of the residuals, over a window that clips the far outlier spikes
    std::vector<double> errs(e1.data(), e1.data() + e1.size());
    const double lo = percentile(errs, 0.005) - 5.0;
    const double hi = percentile(errs, 0.995) + 5.0;
    const int pts = 4001;
    const double dx = (hi - lo) / (pts - 1);
    const double h = 0.25;

    std::vector<double> kde(pts), fit(pts);
    for (int k = 0; k < pts; ++k) {
        const double x = lo + k * dx;
        double s = 0.0;
        for (Eigen::Index j = 0; j < e1.size(); ++j) s += gaussian_kernel(x - e1[j], h);
        kde[static_cast<std::size_t>(k)] = s / static_cast<double>(e1.size());
        double f = 0.0;
        for (int i = 0; i < fitted.m(); ++i)
            f += fitted.lambdas[i] * gaussian_kernel(x - fitted.centers[i], fitted.sigmas[i]);
        fit[static_cast<std::size_t>(k)] = f;
    }
    double d_fit = 0.0;
    for (int k = 0; k < pts; ++k) {
        const double diff = fit[static_cast<std::size_t>(k)] - kde[static_cast<std::size_t>(k)];
        d_fit += diff * diff * dx;
    }
    double d_single = std::numeric_limits<double>::infinity();
    for (double s : ps.effective_grid()) {
        double d = 0.0;
        for (int k = 0; k < pts; ++k) {
            const double x = lo + k * dx;
            const double diff = gaussian_kernel(x, s) - kde[static_cast<std::size_t>(k)];
            d += diff * diff * dx;
        }
        d_single = std::min(d_single, d);
    }
    detail = fmt("density match on first-iteration residuals: dist(fitted,kde)=%.5f, "
                 "best single zero-mean gaussian=%.5f, ratio=%.3f (need <=0.25)",
                 d_fit, d_single, d_fit / d_single);
    return d_fit <= 0.25 * d_single;
}

// ---------------------------------------------------------------- criterion 5

bool property1() {
    auto rng = make_rng(2024);
    std::uniform_int_distribution<int> mm(1, 4);
    std::uniform_real_distribution<double> uc(-3.0, 3.0), us(0.2, 3.0), ue(-5.0, 5.0),
        ul(0.05, 1.0);
    for (int t = 0; t < 50; ++t) {
        const int m = mm(rng);
        VectorXd lam(m), c(m), sig(m);
        for (int i = 0; i < m; ++i) {
            lam[i] = ul(rng);
            c[i] = uc(rng);
            sig[i] = us(rng);
        }
        lam /= lam.sum();
        MkcParams params(lam, c, sig, true);
        VectorXd e(200);
        for (int j = 0; j < 200; ++j) e[j] = ue(rng);
        const double v = mkc_estimate(e, params);
        double bound = 0.0;
        for (int i = 0; i < m; ++i) bound += lam[i] / (std::sqrt(2.0 * M_PI) * sig[i]);
        if (!(v > 0.0 && v <= bound)) return false;
    }
    return true;
}

bool property2(double& err) {
    const VectorXd e = vec({-1.0, 0.3, 1.4, 0.9, -0.2});
    MkcParams params(vec({0.55, 0.45}), vec({-0.5, 1.0}), vec({1.0, 1.0}));
    // even-moment series of the unit-bandwidth kernel, truncated at n = 20
    double truncated = 0.0;
    for (Eigen::Index j = 0; j < e.size(); ++j) {
        for (int i = 0; i < params.m(); ++i) {
            const double u = e[j] - params.centers[i];
            double term = 1.0, series = 0.0, factorial = 1.0, pow2 = 1.0, u2n = 1.0;
            for (int n = 0; n <= 20; ++n) {
                if (n > 0) {
                    factorial *= n;
                    pow2 *= 2.0;
                    u2n *= u * u;
                }
                term = ((n % 2) ? -1.0 : 1.0) * u2n / (pow2 * factorial);
                series += term;
            }
            truncated += params.lambdas[i] * series / std::sqrt(2.0 * M_PI);
        }
    }
    truncated /= static_cast<double>(e.size());
    err = std::abs(truncated - mkc_estimate(e, params));
    return err <= 1e-9;
}

bool property3(double& rel) {
    MkcParams params(vec({0.4, 0.6}), vec({-0.5, 0.5}), vec({50.0, 80.0}));
    auto rng = make_rng(777);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VectorXd e(400);
    for (int j = 0; j < 400; ++j) e[j] = u(rng);
    const double v = mkc_estimate(e, params);
    double approx = 0.0;
    for (int i = 0; i < params.m(); ++i) {
        const double second_moment = (e.array() - params.centers[i]).square().mean();
        approx += params.lambdas[i] / (std::sqrt(2.0 * M_PI) * params.sigmas[i]) *
                  (1.0 - second_moment / (2.0 * params.sigmas[i] * params.sigmas[i]));
    }
    rel = std::abs(v - approx) / v;
    return rel <= 1e-6;
}

bool property4(double& err) {
    auto rng = make_rng(99);
    std::normal_distribution<double> gauss(0.0, 1.0);
    VectorXd e(100000);
    for (int j = 0; j < 100000; ++j) e[j] = gauss(rng);
    MkcParams params(vec({0.3, 0.7}), vec({-1.0, 0.5}), vec({0.05, 0.05}));
    const double v = mkc_estimate(e, params);
    auto std_normal_pdf = [](double x) {
        return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    };
    const double target = 0.3 * std_normal_pdf(-1.0) + 0.7 * std_normal_pdf(0.5);
    err = std::abs(v - target);
    return err <= 0.02;
}

bool criterion5(std::string& detail) {
    double p2 = 0.0, p3 = 0.0, p4 = 0.0;
    const bool b1 = property1();
    const bool b2 = property2(p2);
    const bool b3 = property3(p3);
    const bool b4 = property4(p4);
    detail = fmt("bound %s; even-moment truncation err=%.2e (<=1e-9); large-bandwidth "
                 "expansion rel err=%.2e (<=1e-6); small-bandwidth kde err=%.4f (<=0.02)",
                 b1 ? "holds" : "VIOLATED", p2, p3, p4);
    return b1 && b2 && b3 && b4;
}

// ---------------------------------------------------------------- criterion 6

bool criterion6(std::string& detail) {
    // kernel centers/bandwidths matched to the case-1 noise modes (what the
    // parameter-selection stage recovers on these residuals); with mismatched
    // kernels the objective has no dominant peak and no solver could pass
    const MkcParams params(vec({0.5, 0.5}), vec({-4.0, 4.0}), vec({1.0, 1.0}));
    const double sqrt_2pi = std::sqrt(2.0 * M_PI);
    double worst_gap = -std::numeric_limits<double>::infinity();
    double worst_fd = 0.0;

    for (int t = 0; t < 20; ++t) {
        Dataset data = gen_linear_dataset(vec({1.0, 2.0}), 50, NoiseSpec::table_case(1),
                                          -2.0, 2.0, 300 + static_cast<std::uint64_t>(t));
        const LipProblem problem(data.inputs, data.targets,
                                 default_gamma_prime(data.inputs));
        FitReport rep = fit_mmkcc(problem, params, SolverConfig(300, 1e-15));
        const double j_fit = objective_J(rep.weights, problem, params);

        // exhaustive 0.01-step grid over [-3, 5]^2, one column slab per b0
        const int G = 801;
        Eigen::VectorXd b1s(G);
        for (int k = 0; k < G; ++k) b1s[k] = -3.0 + 0.01 * k;
        const double n = static_cast<double>(problem.n());
        const double reg = problem.reg_gamma_prime / (2.0 * n);
        double j_grid = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < G; ++a) {
            const double b0 = -3.0 + 0.01 * a;
            Eigen::ArrayXXd E =
                ((problem.targets - problem.features.col(0) * b0).replicate(1, G) -
                 problem.features.col(1) * b1s.transpose())
                    .array();
            Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(G);
            for (int i = 0; i < params.m(); ++i) {
                const double s = params.sigmas[i];
                acc += params.lambdas[i] / (sqrt_2pi * s) *
                       ((E - params.centers[i]).square() / (-2.0 * s * s))
                           .exp()
                           .colwise()
                           .sum()
                           .transpose();
            }
            for (int k = 0; k < G; ++k) {
                const double j = acc[k] / n - reg * (b0 * b0 + b1s[k] * b1s[k]);
                j_grid = std::max(j_grid, j);
            }
        }
        worst_gap = std::max(worst_gap, j_grid - j_fit);

        // analytic gradient against central differences at a generic point
        const VectorXd probe = rep.weights + vec({0.25, -0.4});
        const VectorXd g = objective_gradient(probe, problem, params);
        VectorXd g_fd(2);
        const double hstep = 1e-6;
        for (int k = 0; k < 2; ++k) {
            VectorXd up = probe, dn = probe;
            up[k] += hstep;
            dn[k] -= hstep;
            g_fd[k] = (objective_J(up, problem, params) - objective_J(dn, problem, params)) /
                      (2.0 * hstep);
        }
        worst_fd = std::max(worst_fd, (g - g_fd).norm() / (1e-12 + g_fd.norm()));
    }
    detail = fmt("20 contaminated 2-weight problems: max (grid J - fixed-point J)=%.2e "
                 "(need <=1e-4), max gradient-vs-fd rel err=%.2e (need <=1e-5)",
                 worst_gap, worst_fd);
    return worst_gap <= 1e-4 && worst_fd <= 1e-5;
}

// ---------------------------------------------------------------- criterion 7

bool criterion7(std::string& detail) {
    using boost::math::quadrature::gauss_kronrod;
    auto rng = make_rng(4242);
    std::uniform_real_distribution<double> uc(-5.0, 5.0), us(0.1, 3.0);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        VectorXd c = vec({uc(rng), uc(rng)});
        VectorXd s = vec({us(rng), us(rng)});
        const GramMatrix K = gram_matrix(c, s);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                auto f = [&](double x) {
                    return gaussian_kernel(x - c[i], s[i]) * gaussian_kernel(x - c[j], s[j]);
                };
                const double q = gauss_kronrod<double, 61>::integrate(
                    f, -std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity(), 15, 1e-12);
                worst = std::max(worst, std::abs(K.entries(i, j) - q));
            }
    }
    detail = fmt("100 random center/bandwidth draws: max |gram - quadrature| = %.2e "
                 "(need <=1e-10)",
                 worst);
    return worst <= 1e-10;
}

// ---------------------------------------------------------------- criterion 8

bool criterion8(std::string& detail) {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::timeseries;
    cfg.runs = 10;
    cfg.schedule = Schedule::two_stage;
    cfg.seed = 42;
    cfg.ts_train = 200;
    cfg.ts_test = 1000;
    cfg.ts_lag = 6;
    cfg.ts_epochs = 100;
    cfg.ts_step = 0.02;
    cfg.ts_refresh = 10;
    cfg.ts_pilot_epochs = 2000;
    cfg.ts_pilot_step = 0.05;
    cfg.mcc_sigma = 0.7;
    cfg.mmcc_sigmas = {0.5, 1.5};
    cfg.ts_mmcc_alpha = 0.8;
    cfg.param_select.m = 1;
    cfg.param_select.center_trim_mad = 2.5;
    cfg.param_select.sigma_grid = {0.3, 0.5, 0.7, 0.9, 1.1, 1.3, 1.5, 1.7, 1.9};

    const auto t0 = std::chrono::steady_clock::now();
    BenchResult res = run_experiment(cfg);
    const double el = seconds_since(t0);
    const double mse = res.mean_of(Criterion::mse), mcc = res.mean_of(Criterion::mcc);
    const double mmcc = res.mean_of(Criterion::mmcc), mmkcc = res.mean_of(Criterion::mmkcc);
    detail = fmt("10 seeded chaotic-series trainings: clean-test rmse mmkcc=%.4f "
                 "mmcc=%.4f mcc=%.4f mse=%.4f; need mmkcc<=mmcc<=mcc<mse and "
                 "mmkcc<=0.9*mse, <=600s (took %.0fs)",
                 mmkcc, mmcc, mcc, mse, el);
    return mmkcc <= mmcc && mmcc <= mcc && mcc < mse && mmkcc <= 0.9 * mse && el <= 600.0;
}

// ---------------------------------------------------------------- criterion 9

bool criterion9(std::string& detail) {
    ExperimentConfig cfg;
    cfg.kind = ExperimentKind::elm;
    cfg.criteria = {Criterion::mse, Criterion::mmkcc};
    cfg.noise_case = 1;
    cfg.runs = 100;
    cfg.n_samples = 200;
    cfg.schedule = Schedule::online;
    cfg.seed = 42;
    cfg.solver.max_iters = 10;
    cfg.elm_hidden = 20;
    cfg.elm_input_dim = 2;
    cfg.elm_test_samples = 500;
    BenchResult res = run_experiment(cfg);
    const int i_mse = res.criterion_index(Criterion::mse);
    const int i_mmkcc = res.criterion_index(Criterion::mmkcc);
    int wins = 0;
    for (int r = 0; r < cfg.runs; ++r) {
        if (std::isnan(res.run_rmse(r, 0))) continue;
        if (res.run_rmse(r, i_mmkcc) <= res.run_rmse(r, i_mse)) ++wins;
    }
    detail = fmt("random-feature pipeline on noisy sine targets: mmkcc test rmse <= mse "
                 "on %d of 100 runs (need >=80)",
                 wins);
    return wins >= 80;
}

// ---------------------------------------------------------------- criterion 10

struct CliRun {
    int exit_code;
    std::string output;
};

CliRun run_cli(const std::string& args) {
    const std::string cmd = std::string(MKC_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, "popen failed"};
    std::string out;
    char buf[512];
    while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) out.append(buf, n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

// CSV lines with the trailing (timing) column removed
std::vector<std::string> read_sans_timing(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        const std::size_t cut = line.rfind(',');
        lines.push_back(cut == std::string::npos ? line : line.substr(0, cut));
    }
    return lines;
}

bool criterion10(std::string& detail) {
    const fs::path base = fs::temp_directory_path() / "mkc_acceptance_determinism";
    fs::remove_all(base);
    fs::create_directories(base);
    const fs::path conf = base / "bench.conf";
    {
        std::ofstream out(conf);
        out << "kind = linear\nnoise_case = 1\nruns = 5\nn_samples = 60\n"
            << "solver_iters = 5\nseed = 42\nemit_svg = false\n";
    }
    const CliRun a = run_cli("bench --config " + conf.string() + " --out " +
                             (base / "a").string());
    const CliRun b = run_cli("bench --config " + conf.string() + " --out " +
                             (base / "b").string());
    if (a.exit_code != 0 || b.exit_code != 0) {
        detail = fmt("bench invocations failed (exit %d / %d)", a.exit_code, b.exit_code);
        return false;
    }
    bool same = true;
    for (const char* name : {"summary.csv", "runs.csv"})
        same = same && read_sans_timing(base / "a" / name) ==
                           read_sans_timing(base / "b" / name);
    detail = fmt("two bench invocations, identical config and seed: summary.csv and "
                 "runs.csv %s (timing columns excluded)",
                 same ? "byte-identical" : "DIFFER");
    return same;
}

}  // namespace

int main() {
    struct Entry {
        int id;
        std::function<bool(std::string&)> run;
    };
    const std::vector<Entry> entries = {
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
        {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, criterion8},
        {9, criterion9}, {10, criterion10},
    };
    int failures = 0;
    for (const auto& entry : entries) {
        std::string detail;
        bool pass = false;
        try {
            pass = entry.run(detail);
        } catch (const std::exception& e) {
            detail = fmt("exception: %s", e.what());
        }
        std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", entry.id,
                    detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    }
    if (failures) std::printf("%d of 10 criteria failed\n", failures);
    return failures;
}
