#pragma once

#include "sparse_time/decompose.hpp"
#include "sparse_time/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sparsetime {

// ---------------------------------------------------------------- CSV ingest

struct CsvOptions {
    char delimiter = ',';
    /// Cells equal to this value are treated as missing (e.g. -200 for UCI Air Quality).
    std::optional<double> missing_sentinel;
    /// Columns to keep, in order. Empty keeps every numeric column.
    std::vector<std::string> feature_columns;
    /// Prediction target. Appended to the features if not already listed.
    std::string target_column;
};

struct RawTable {
    std::vector<std::string> columns;
    Matrix values;                     // T x d after imputation
    std::vector<std::uint8_t> missing; // T x d row-major, 1 where the source cell was missing
    std::size_t target_index = 0;

    std::size_t column_index(const std::string& name) const;
};

/// Reads a header-first CSV. Unparseable numeric cells become missing, then
/// are forward-filled and back-filled. Throws DataError with kind
/// MissingFile, MissingColumn or NoRows.
RawTable ingest_csv(const std::filesystem::path& path, const CsvOptions& options);
RawTable parse_csv(std::istream& in, const CsvOptions& options);

// ---------------------------------------------------------- normalization

/// Half-open row range [begin, end).
struct RowRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    bool operator==(const RowRange&) const = default;
};

struct NormStats {
    std::vector<double> mean;
    std::vector<double> stddev;  // population (1/N)
    double epsilon = 1e-8;

    Matrix apply(const Matrix& x) const;
    Matrix invert(const Matrix& x_normalized) const;
    double invert_value(double v, std::size_t feature) const;

    bool operator==(const NormStats&) const = default;
};

NormStats fit_norm_stats(const Matrix& x, RowRange train_rows);

/// Statistics from `train_rows` only, applied to every row.
std::pair<Matrix, NormStats> zscore(const Matrix& x, RowRange train_rows);

// ------------------------------------------------------------- windowing

struct Window {
    Matrix x;      // L x d
    double target; // next row, target feature
};

/// Sample i covers rows [i, i + L) and targets row i + L. Requires T > L >= 2.
std::vector<Window> make_windows(const Matrix& x, std::size_t window_length,
                                 std::size_t target_feature);

struct ChronoSplit {
    RowRange train;
    RowRange validation;
    RowRange test;
};

/// floor(0.7 T) / floor(0.15 T) / remainder, in time order. Requires T >= 10.
ChronoSplit chrono_split(std::size_t T);

// --------------------------------------------------------------- dataset

struct Sample {
    Decomposition components;
    double target = 0.0;
    std::size_t first_row = 0;  // raw row index where the window starts
};

struct DatasetOptions {
    std::size_t window_length = 24;
    std::size_t smooth_window = 5;
    std::size_t target_feature = 0;
};

struct SplitDataset {
    std::vector<Sample> train;
    std::vector<Sample> validation;
    std::vector<Sample> test;
    std::size_t window_length = 0;
    std::size_t target_feature = 0;
    std::size_t smooth_window = 0;
    NormStats stats;
    ChronoSplit ranges;
};

/// Chronological split, z-score with training statistics, then windows kept
/// entirely inside their own split.
SplitDataset build_dataset(const Matrix& raw, const DatasetOptions& options);

/// Same as above, but normalizes with previously fitted statistics.
SplitDataset build_dataset(const Matrix& raw, const DatasetOptions& options,
                           const NormStats& stats);

/// FNV-1a over the bytes of every sample; identical splits hash identically.
std::uint64_t fingerprint(std::span<const Sample> samples);

// ------------------------------------------------------------- synthetic

enum class SynthKind { TrendDominant, SpikeDominant, Seasonal, RandomWalk };

struct SynthOptions {
    /// Gaussian noise standard deviation; unset uses the generator default.
    std::optional<double> noise;
};

/// Seeded stand-in series, T x d:
///  - TrendDominant: linear ramp per column plus Gaussian noise (default 0.05)
///  - SpikeDominant: flat level, sparse Bernoulli spikes of random sign
///    (p = 0.05, magnitude 2..4), and an echo of 0.6 * |x_{t-1} - x_{t-2}|
///    added to each step
///  - Seasonal: sinusoid with a per-column period plus a mild ramp and noise
///  - RandomWalk: cumulative standard Gaussian steps
Matrix synth_series(SynthKind kind, std::size_t T, std::size_t d, std::uint64_t seed,
                    const SynthOptions& options = {});

std::string to_string(SynthKind kind);
std::optional<SynthKind> parse_synth_kind(const std::string& name);

} // namespace sparsetime
