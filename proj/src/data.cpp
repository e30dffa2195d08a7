#include "sparse_time/data.hpp"

#include "sparse_time/errors.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <stdexcept>

namespace sparsetime {

Matrix NormStats::apply(const Matrix& x) const {
    if (x.cols() != mean.size()) {
        throw std::invalid_argument("NormStats::apply: " + std::to_string(mean.size()) +
                                    " features fitted, input is " + shape_string(x));
    }
    Matrix out = x;
    for (std::size_t t = 0; t < out.rows(); ++t) {
        auto row = out.row(t);
        for (std::size_t j = 0; j < row.size(); ++j) {
            row[j] = (row[j] - mean[j]) / (stddev[j] + epsilon);
        }
    }
    return out;
}

Matrix NormStats::invert(const Matrix& x_normalized) const {
    Matrix out = x_normalized;
    for (std::size_t t = 0; t < out.rows(); ++t) {
        auto row = out.row(t);
        for (std::size_t j = 0; j < row.size(); ++j) {
            row[j] = invert_value(row[j], j);
        }
    }
    return out;
}

double NormStats::invert_value(double v, std::size_t feature) const {
    return v * (stddev[feature] + epsilon) + mean[feature];
}

NormStats fit_norm_stats(const Matrix& x, RowRange train_rows) {
    if (train_rows.size() == 0 || train_rows.end > x.rows() || train_rows.begin > train_rows.end) {
        throw std::invalid_argument("fit_norm_stats: empty or out-of-range training rows");
    }
    const std::size_t d = x.cols();
    const double n = static_cast<double>(train_rows.size());
    NormStats stats;
    stats.mean.assign(d, 0.0);
    stats.stddev.assign(d, 0.0);
    for (std::size_t t = train_rows.begin; t < train_rows.end; ++t) {
        for (std::size_t j = 0; j < d; ++j) {
            stats.mean[j] += x(t, j);
        }
    }
    for (double& m : stats.mean) {
        m /= n;
    }
    for (std::size_t t = train_rows.begin; t < train_rows.end; ++t) {
        for (std::size_t j = 0; j < d; ++j) {
            const double c = x(t, j) - stats.mean[j];
            stats.stddev[j] += c * c;
        }
    }
    for (double& s : stats.stddev) {
        s = std::sqrt(s / n);
    }
    return stats;
}

std::pair<Matrix, NormStats> zscore(const Matrix& x, RowRange train_rows) {
    NormStats stats = fit_norm_stats(x, train_rows);
    Matrix normalized = stats.apply(x);
    return {std::move(normalized), std::move(stats)};
}

std::vector<Window> make_windows(const Matrix& x, std::size_t window_length,
                                 std::size_t target_feature) {
    if (window_length < 2) {
        throw std::invalid_argument("make_windows: window length must be >= 2");
    }
    if (target_feature >= x.cols()) {
        throw std::invalid_argument("make_windows: target feature " +
                                    std::to_string(target_feature) + " out of range for " +
                                    shape_string(x));
    }
    if (x.rows() <= window_length) {
        throw DataError(DataError::Kind::Insufficient,
                        "make_windows: " + std::to_string(x.rows()) +
                            " rows cannot fill a window of " + std::to_string(window_length) +
                            " plus a target");
    }
    const std::size_t d = x.cols();
    std::vector<Window> out;
    out.reserve(x.rows() - window_length);
    for (std::size_t i = 0; i + window_length < x.rows(); ++i) {
        const auto first = x.values().begin() + static_cast<std::ptrdiff_t>(i * d);
        std::vector<double> data(first, first + static_cast<std::ptrdiff_t>(window_length * d));
        out.push_back({Matrix(window_length, d, std::move(data)),
                       x(i + window_length, target_feature)});
    }
    return out;
}

ChronoSplit chrono_split(std::size_t T) {
    if (T < 10) {
        throw DataError(DataError::Kind::Insufficient,
                        "chrono_split: need at least 10 rows, got " + std::to_string(T));
    }
    const std::size_t n_train = T * 7 / 10;
    const std::size_t n_val = T * 15 / 100;
    return {{0, n_train}, {n_train, n_train + n_val}, {n_train + n_val, T}};
}

namespace {

Matrix slice_rows(const Matrix& x, RowRange range) {
    const auto first = x.values().begin() + static_cast<std::ptrdiff_t>(range.begin * x.cols());
    const auto last = x.values().begin() + static_cast<std::ptrdiff_t>(range.end * x.cols());
    return Matrix(range.size(), x.cols(), std::vector<double>(first, last));
}

std::vector<Sample> samples_for(const Matrix& normalized, RowRange range,
                                const DatasetOptions& options, const char* split_name) {
    if (range.size() <= options.window_length) {
        throw DataError(DataError::Kind::Insufficient,
                        std::string(split_name) + " split has " + std::to_string(range.size()) +
                            " rows, window length " + std::to_string(options.window_length) +
                            " needs more");
    }
    std::vector<Sample> out;
    auto windows =
        make_windows(slice_rows(normalized, range), options.window_length, options.target_feature);
    out.reserve(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        out.push_back({decompose_experiment(windows[i].x, options.smooth_window), windows[i].target,
                       range.begin + i});
    }
    return out;
}

SplitDataset assemble(const Matrix& raw, const DatasetOptions& options, NormStats stats,
                      ChronoSplit ranges) {
    if (options.target_feature >= raw.cols()) {
        throw std::invalid_argument("build_dataset: target feature out of range");
    }
    const Matrix normalized = stats.apply(raw);
    SplitDataset ds;
    ds.train = samples_for(normalized, ranges.train, options, "train");
    ds.validation = samples_for(normalized, ranges.validation, options, "validation");
    ds.test = samples_for(normalized, ranges.test, options, "test");
    ds.window_length = options.window_length;
    ds.target_feature = options.target_feature;
    ds.smooth_window = options.smooth_window;
    ds.stats = std::move(stats);
    ds.ranges = ranges;
    return ds;
}

} // namespace

SplitDataset build_dataset(const Matrix& raw, const DatasetOptions& options) {
    const ChronoSplit ranges = chrono_split(raw.rows());
    return assemble(raw, options, fit_norm_stats(raw, ranges.train), ranges);
}

SplitDataset build_dataset(const Matrix& raw, const DatasetOptions& options,
                           const NormStats& stats) {
    return assemble(raw, options, stats, chrono_split(raw.rows()));
}

std::uint64_t fingerprint(std::span<const Sample> samples) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* data, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    for (const Sample& s : samples) {
        for (const Matrix* m : {&s.components.s, &s.components.m, &s.components.g}) {
            mix(m->values().data(), m->values().size_bytes());
        }
        mix(&s.target, sizeof s.target);
    }
    return h;
}

Matrix synth_series(SynthKind kind, std::size_t T, std::size_t d, std::uint64_t seed,
                    const SynthOptions& options) {
    if (T < 20 || d == 0) {
        throw std::invalid_argument("synth_series: need T >= 20 and d >= 1");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double n = static_cast<double>(T);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    Matrix x(T, d);

    switch (kind) {
    case SynthKind::TrendDominant: {
        const double noise = options.noise.value_or(0.05);
        for (std::size_t j = 0; j < d; ++j) {
            const double slope = 1.0 + unit(rng);
            const double offset = unit(rng) - 0.5;
            for (std::size_t t = 0; t < T; ++t) {
                x(t, j) = offset + slope * static_cast<double>(t) / n;
            }
        }
        if (noise != 0.0) {
            for (double& v : x.values()) {
                v += noise * gauss(rng);
            }
        }
        break;
    }
    case SynthKind::SpikeDominant: {
        const double noise = options.noise.value_or(0.02);
        for (std::size_t j = 0; j < d; ++j) {
            const double level = unit(rng);
            for (std::size_t t = 0; t < T; ++t) {
                double v = level + noise * gauss(rng);
                if (unit(rng) < 0.05) {
                    const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
                    v += sign * (2.0 + 2.0 * unit(rng));
                }
                // Abrupt changes echo into the next step regardless of direction.
                if (t >= 2) {
                    v += 0.6 * std::abs(x(t - 1, j) - x(t - 2, j));
                }
                x(t, j) = v;
            }
        }
        break;
    }
    case SynthKind::Seasonal: {
        const double noise = options.noise.value_or(0.05);
        for (std::size_t j = 0; j < d; ++j) {
            const double period = 16.0 + 8.0 * static_cast<double>(j) + 4.0 * unit(rng);
            const double phase = two_pi * unit(rng);
            const double ramp = 0.5 * unit(rng);
            for (std::size_t t = 0; t < T; ++t) {
                const double tt = static_cast<double>(t);
                x(t, j) = std::sin(two_pi * tt / period + phase) + ramp * tt / n + noise * gauss(rng);
            }
        }
        break;
    }
    case SynthKind::RandomWalk: {
        for (std::size_t j = 0; j < d; ++j) {
            double level = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
                level += gauss(rng);
                x(t, j) = level;
            }
        }
        break;
    }
    }
    return x;
}

std::string to_string(SynthKind kind) {
    switch (kind) {
    case SynthKind::TrendDominant:
        return "trend";
    case SynthKind::SpikeDominant:
        return "spike";
    case SynthKind::Seasonal:
        return "seasonal";
    case SynthKind::RandomWalk:
        return "random_walk";
    }
    return "unknown";
}

std::optional<SynthKind> parse_synth_kind(const std::string& name) {
    for (SynthKind k : {SynthKind::TrendDominant, SynthKind::SpikeDominant, SynthKind::Seasonal,
                        SynthKind::RandomWalk}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    return std::nullopt;
}

} // namespace sparsetime
