#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mkc/config.hpp"
#include "mkc/datagen.hpp"
#include "mkc/kernel.hpp"
#include "mkc/models.hpp"
#include "mkc/param_select.hpp"
#include "mkc/solver.hpp"

namespace mkc {

enum class Criterion { mse, mcc, mmcc, mmkcc };
enum class Schedule { online, two_stage };
enum class ExperimentKind { linear, elm, timeseries };

std::string criterion_name(Criterion c);
Criterion criterion_from_name(const std::string& name);
std::string schedule_name(Schedule s);
Schedule schedule_from_name(const std::string& name);
std::string kind_name(ExperimentKind k);
ExperimentKind kind_from_name(const std::string& name);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::linear;
    std::vector<Criterion> criteria{Criterion::mse, Criterion::mcc, Criterion::mmcc,
                                    Criterion::mmkcc};
    int noise_case = 1;
    int runs = 100;
    int n_samples = 400;
    Schedule schedule = Schedule::online;
    std::uint64_t seed = 42;
    std::string out_dir;
    bool emit_svg = true;

    SolverConfig solver;  // max_iters is the fixed-point budget K
    ParamSelectConfig param_select;

    // Fixed-parameter arms (zero-centered kernels).
    double mcc_sigma = 1.0;
    std::vector<double> mmcc_sigmas{0.5, 1.5};
    std::vector<double> mmcc_lambdas{0.5, 0.5};

    // When set, the mmkcc arm skips parameter determination and uses these
    // (reduction checks: m=1, c=0 must reproduce the mcc arm exactly).
    bool mmkcc_frozen = false;
    std::vector<double> frozen_lambdas, frozen_centers, frozen_sigmas;

    // linear kind
    std::vector<double> beta_star{1.0, 2.0};
    double input_lo = -2.0, input_hi = 2.0;

    // elm kind
    int elm_hidden = 20;
    int elm_input_dim = 2;
    int elm_test_samples = 500;

    // timeseries kind: nets train per-sample (shuffled order, slope-matched
    // MKC gradients); the two-stage pilot is a full-batch MSE fit so its
    // residuals are free of stochastic-update bias.
    int ts_train = 200;
    int ts_test = 1000;
    int ts_lag = 6;
    int ts_epochs = 100;        // per-sample passes over the training windows
    double ts_step = 0.02;
    int ts_refresh = 10;        // passes between trace points / online refits
    double ts_mmcc_alpha = 0.8;   // mixture weight: lambda = (alpha, 1 - alpha)
    int ts_pilot_epochs = 2000;   // full-batch pilot for the two-stage schedule
    double ts_pilot_step = 0.05;

    void validate() const;

    // Reads every known key, applies defaults, and rejects unknown keys.
    static ExperimentConfig from_config(const ConfigMap& cfg);
};

struct BenchResult {
    std::vector<Criterion> criteria;
    // runs x criteria; NaN rows for flagged (excluded) runs.
    Eigen::MatrixXd run_rmse;
    Eigen::MatrixXd run_time_sec;
    std::vector<int> flagged_runs;
    Eigen::VectorXd mean_rmse;   // over included runs
    Eigen::VectorXd std_rmse;    // sample standard deviation
    Eigen::VectorXd mean_time_sec;
    // Per-iteration mean RMSE traces; trace(k, i) is valid for k < trace_len[i].
    Eigen::MatrixXd trace;
    std::vector<int> trace_len;
    // Error sample + fitted kernel parameters from the first run's mmkcc arm,
    // for the histogram-overlay figure.
    std::vector<double> density_errors;
    std::optional<MkcParams> density_params;

    int criterion_index(Criterion c) const;
    double mean_of(Criterion c) const;
};

BenchResult run_experiment(const ExperimentConfig& cfg);

// Writes summary.csv, runs.csv, convergence.csv and (optionally) SVG charts
// into out_dir, creating it if needed.
void emit_report(const BenchResult& result, const std::string& out_dir, bool svg);

double rmse_weights(const Eigen::VectorXd& beta, const Eigen::VectorXd& beta_star);
double rmse_predictions(const Eigen::VectorXd& predictions,
                        const Eigen::VectorXd& targets);

}  // namespace mkc
