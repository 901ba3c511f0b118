#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mkc {

// One Gaussian component of an inner noise mixture. `variance` is a variance,
// not a standard deviation.
struct GaussComponent {
    double weight = 1.0;
    double mean = 0.0;
    double variance = 1.0;
};

// Contaminated noise model: with probability 1 - outlier_prob draw from the
// inner mixture, else from the outlier Gaussian.
struct NoiseSpec {
    std::vector<GaussComponent> inner;
    double outlier_prob = 0.0;
    double outlier_mean = 0.0;
    double outlier_variance = 1.0;

    void validate() const;

    // Benchmark noise cases 1..3 (10% outliers of variance 1e4 over a
    // two-component inner mixture).
    static NoiseSpec table_case(int id);
};

Eigen::VectorXd sample_noise(const NoiseSpec& spec, int n, std::uint64_t seed);

// Regression dataset. `input_min_max` / `target_min_max` hold per-column
// normalization statistics fitted on a training split; empty when the data is
// unnormalized.
struct Dataset {
    Eigen::MatrixXd inputs;
    Eigen::VectorXd targets;
    std::vector<std::pair<double, double>> input_min_max;
    std::pair<double, double> target_min_max{0.0, 0.0};
    bool normalized = false;

    int n() const { return static_cast<int>(inputs.rows()); }
    int d() const { return static_cast<int>(inputs.cols()); }
};

// t = beta_star . x + noise with x uniform over [input_lo, input_hi]^d.
Dataset gen_linear_dataset(const Eigen::VectorXd& beta_star, int n,
                           const NoiseSpec& spec, double input_lo,
                           double input_hi, std::uint64_t seed);

struct MackeyGlassSpec {
    double a = 0.2;
    double b = 0.1;
    int tau = 30;
    bool use_noise = false;
    NoiseSpec noise;
    int length = 200;
    int warmup = 500;
    // Initial-history range; [0, 0] pins the whole history to the map's
    // fixed point at zero.
    double init_lo = 0.1;
    double init_hi = 1.3;
    // When > 0 the returned series carries `clean_tail` extra noise-free
    // values after the `length` noisy ones, continuing the same trajectory;
    // used to build clean test segments.
    int clean_tail = 0;
    std::uint64_t seed = 0;

    static NoiseSpec series_noise();
};

Eigen::VectorXd mackey_glass(const MackeyGlassSpec& spec);

// Sliding windows: row j = series[j .. j+lag-1], target j = series[j+lag].
std::pair<Eigen::MatrixXd, Eigen::VectorXd> windowize(
    const Eigen::VectorXd& series, int lag);

// Raw numeric CSV reader: header row required, '.' decimal separator.
std::pair<std::vector<std::string>, Eigen::MatrixXd> read_csv(
    const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values);

// Random row split plus min-max normalization fitted on the training split
// and applied to both. `target_column` < 0 counts from the end (-1 = last).
// Constant columns are mapped to 0.
std::pair<Dataset, Dataset> load_csv(const std::string& path,
                                     int target_column, double split_fraction,
                                     std::uint64_t seed);

}  // namespace mkc
