#include "mkc/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "mkc/errors.hpp"
#include "mkc/rng.hpp"

namespace mkc {

void NoiseSpec::validate() const {
    if (inner.empty()) throw InvalidParamError("noise spec needs at least one inner component");
    double wsum = 0.0;
    for (const auto& g : inner) {
        if (!(g.weight > 0.0)) throw InvalidParamError("inner mixture weights must be positive");
        if (!(g.variance > 0.0) || !std::isfinite(g.mean))
            throw InvalidParamError("inner mixture components must have finite mean and positive variance");
        wsum += g.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-12)
        throw InvalidParamError("inner mixture weights must sum to 1");
    if (!(outlier_prob >= 0.0 && outlier_prob <= 1.0))
        throw InvalidParamError("outlier probability must lie in [0,1]");
    if (!(outlier_variance > 0.0) || !std::isfinite(outlier_mean))
        throw InvalidParamError("outlier component must have finite mean and positive variance");
}

NoiseSpec NoiseSpec::table_case(int id) {
    NoiseSpec s;
    s.outlier_prob = 0.1;
    s.outlier_mean = 0.0;
    s.outlier_variance = 10000.0;
    switch (id) {
        case 1:
            s.inner = {{0.5, 4.0, 1.0}, {0.5, -4.0, 1.0}};
            break;
        case 2:
            s.inner = {{1.0 / 3.0, 5.0, 1.0}, {2.0 / 3.0, -2.0, 1.0}};
            break;
        case 3:
            s.inner = {{0.5, 0.0, 1.0}, {0.5, 0.0, 5.0}};
            break;
        default:
            throw InvalidParamError("unknown noise case (expected 1, 2 or 3)");
    }
    return s;
}

Eigen::VectorXd sample_noise(const NoiseSpec& spec, int n, std::uint64_t seed) {
    spec.validate();
    if (n < 0) throw InvalidParamError("sample count must be non-negative");
    auto rng = make_rng(seed);
    std::vector<double> weights;
    weights.reserve(spec.inner.size());
    for (const auto& g : spec.inner) weights.push_back(g.weight);
    std::discrete_distribution<int> pick(weights.begin(), weights.end());
    std::bernoulli_distribution gate(spec.outlier_prob);
    std::normal_distribution<double> unit(0.0, 1.0);

    Eigen::VectorXd out(n);
    for (int j = 0; j < n; ++j) {
        if (spec.outlier_prob > 0.0 && gate(rng)) {
            out[j] = spec.outlier_mean + std::sqrt(spec.outlier_variance) * unit(rng);
        } else {
            const auto& g = spec.inner[static_cast<std::size_t>(pick(rng))];
            out[j] = g.mean + std::sqrt(g.variance) * unit(rng);
        }
    }
    return out;
}

Dataset gen_linear_dataset(const Eigen::VectorXd& beta_star, int n,
                           const NoiseSpec& spec, double input_lo,
                           double input_hi, std::uint64_t seed) {
    if (beta_star.size() == 0) throw EmptyInputError("beta_star is empty");
    if (n <= 0) throw InvalidParamError("dataset size must be positive");
    if (!(input_lo < input_hi)) throw InvalidParamError("input box is empty");
    const int d = static_cast<int>(beta_star.size());
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> box(input_lo, input_hi);

    Dataset ds;
    ds.inputs.resize(n, d);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < d; ++k) ds.inputs(j, k) = box(rng);
    // Noise drawn from a sub-stream so input geometry and noise stay
    // independently reproducible.
    Eigen::VectorXd rho = sample_noise(spec, n, splitmix64(seed ^ 0x9e3779b97f4a7c15ULL));
    ds.targets = ds.inputs * beta_star + rho;
    return ds;
}

NoiseSpec MackeyGlassSpec::series_noise() {
    NoiseSpec s;
    s.inner = {{0.45, -0.05, 0.05}, {0.45, 0.05, 0.05}, {0.1, 0.0, 0.2}};
    s.outlier_prob = 0.0;
    return s;
}

Eigen::VectorXd mackey_glass(const MackeyGlassSpec& spec) {
    if (spec.tau < 1) throw InvalidParamError("delay tau must be >= 1");
    if (spec.length < 1) throw InvalidParamError("series length must be >= 1");
    if (spec.warmup < spec.tau) throw ConfigError("warmup must be at least tau");
    if (spec.clean_tail < 0) throw InvalidParamError("clean_tail must be >= 0");
    if (!(spec.init_lo <= spec.init_hi) || !std::isfinite(spec.init_lo) ||
        !std::isfinite(spec.init_hi))
        throw InvalidParamError("initial-history range is empty or non-finite");

    auto rng = make_rng(spec.seed);
    std::uniform_real_distribution<double> init(spec.init_lo, spec.init_hi);
    std::deque<double> hist;
    for (int t = 0; t < spec.tau; ++t) hist.push_back(init(rng));

    const int noisy_steps = spec.warmup + spec.length;
    Eigen::VectorXd rho;
    if (spec.use_noise) {
        rho = sample_noise(spec.noise, noisy_steps, splitmix64(spec.seed ^ 0xda942042e4dd58b5ULL));
    } else {
        rho = Eigen::VectorXd::Zero(noisy_steps);
    }

    const int total = noisy_steps + spec.clean_tail;
    Eigen::VectorXd out(spec.length + spec.clean_tail);
    int kept = 0;
    for (int t = 0; t < total; ++t) {
        const double prev = hist.back();
        const double delayed = hist.front();
        const double p10 = std::pow(delayed, 10);
        double x = -spec.b * prev + spec.a * delayed / (1.0 + p10);
        if (t < noisy_steps) x += rho[t];
        hist.pop_front();
        hist.push_back(x);
        if (t >= spec.warmup) out[kept++] = x;
    }
    return out;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> windowize(
    const Eigen::VectorXd& series, int lag) {
    if (lag < 1) throw InvalidParamError("window lag must be >= 1");
    const int len = static_cast<int>(series.size());
    if (len <= lag) throw ShapeError("series too short for the requested lag");
    const int n = len - lag;
    Eigen::MatrixXd rows(n, lag);
    Eigen::VectorXd targets(n);
    for (int j = 0; j < n; ++j) {
        rows.row(j) = series.segment(j, lag).transpose();
        targets[j] = series[j + lag];
    }
    return {rows, targets};
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_cell(const std::string& raw, const std::string& path, int row, int col) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(raw, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    // Allow trailing whitespace only; anything else is a non-numeric cell.
    for (std::size_t i = pos; i < raw.size(); ++i) {
        if (!std::isspace(static_cast<unsigned char>(raw[i]))) pos = 0;
    }
    if (pos == 0)
        throw IoError(path + ": non-numeric cell at row " + std::to_string(row) +
                      ", column " + std::to_string(col));
    return v;
}

}  // namespace

std::pair<std::vector<std::string>, Eigen::MatrixXd> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open for reading");
    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": empty file (header row required)");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = split_fields(line);
    const int cols = static_cast<int>(header.size());
    if (cols == 0) throw IoError(path + ": empty header row");

    std::vector<double> cells;
    int rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = split_fields(line);
        if (static_cast<int>(fields.size()) != cols)
            throw IoError(path + ": row " + std::to_string(rows + 2) + " has " +
                          std::to_string(fields.size()) + " fields, expected " +
                          std::to_string(cols));
        for (int c = 0; c < cols; ++c)
            cells.push_back(parse_cell(fields[static_cast<std::size_t>(c)], path, rows + 2, c + 1));
        ++rows;
    }
    if (rows == 0) throw IoError(path + ": no data rows");

    Eigen::MatrixXd values(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            values(r, c) = cells[static_cast<std::size_t>(r) * cols + static_cast<std::size_t>(c)];
    return {header, values};
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values) {
    if (header.size() != static_cast<std::size_t>(values.cols()))
        throw ShapeError("csv header width does not match value columns");
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    for (std::size_t c = 0; c < header.size(); ++c)
        out << (c ? "," : "") << header[c];
    out << "\n";
    char buf[64];
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.12g", values(r, c));
            out << (c ? "," : "") << buf;
        }
        out << "\n";
    }
    if (!out) throw IoError(path + ": write failed");
}

std::pair<Dataset, Dataset> load_csv(const std::string& path, int target_column,
                                     double split_fraction, std::uint64_t seed) {
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
        throw InvalidParamError("split fraction must lie strictly between 0 and 1");
    auto [header, values] = read_csv(path);
    const int rows = static_cast<int>(values.rows());
    const int cols = static_cast<int>(values.cols());
    int tgt = target_column < 0 ? cols + target_column : target_column;
    if (tgt < 0 || tgt >= cols) throw InvalidParamError("target column out of range");
    if (cols < 2) throw ShapeError("csv needs at least one feature column and the target");

    std::vector<int> order(static_cast<std::size_t>(rows));
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const int n_train = static_cast<int>(std::lround(split_fraction * rows));
    if (n_train < 1 || n_train >= rows)
        throw InvalidParamError("split leaves an empty train or test set");

    const int d = cols - 1;
    auto slice = [&](int begin, int count) {
        Dataset ds;
        ds.inputs.resize(count, d);
        ds.targets.resize(count);
        for (int r = 0; r < count; ++r) {
            const int src = order[static_cast<std::size_t>(begin + r)];
            int k = 0;
            for (int c = 0; c < cols; ++c) {
                if (c == tgt) continue;
                ds.inputs(r, k++) = values(src, c);
            }
            ds.targets[r] = values(src, tgt);
        }
        return ds;
    };
    Dataset train = slice(0, n_train);
    Dataset test = slice(n_train, rows - n_train);

    // Min-max statistics come from the training split only; constant columns
    // map to 0 on both splits.
    auto fit_range = [](const Eigen::VectorXd& col) {
        return std::make_pair(col.minCoeff(), col.maxCoeff());
    };
    auto apply = [](Eigen::Ref<Eigen::VectorXd> col, std::pair<double, double> mm) {
        const double span = mm.second - mm.first;
        if (span <= 0.0) {
            col.setZero();
        } else {
            col = (col.array() - mm.first) / span;
        }
    };
    train.input_min_max.resize(static_cast<std::size_t>(d));
    test.input_min_max.resize(static_cast<std::size_t>(d));
    for (int c = 0; c < d; ++c) {
        auto mm = fit_range(train.inputs.col(c));
        train.input_min_max[static_cast<std::size_t>(c)] = mm;
        test.input_min_max[static_cast<std::size_t>(c)] = mm;
        apply(train.inputs.col(c), mm);
        apply(test.inputs.col(c), mm);
    }
    auto tmm = fit_range(train.targets);
    train.target_min_max = tmm;
    test.target_min_max = tmm;
    apply(train.targets, tmm);
    apply(test.targets, tmm);
    train.normalized = true;
    test.normalized = true;
    return {train, test};
}

}  // namespace mkc
