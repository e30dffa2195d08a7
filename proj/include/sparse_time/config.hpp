#pragma once

// Run configuration: a flat `key = value` document, one entry per line, `#`
// starts a comment. `schema = 1` is required. Command-line `--set key=value`
// pairs are applied on top with the same parsing rules.

#include "sparse_time/data.hpp"
#include "sparse_time/train.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sparsetime {

inline constexpr int kConfigSchema = 1;

using KeyValues = std::map<std::string, std::string>;

/// Throws ConfigError on malformed lines or duplicate keys.
KeyValues parse_key_values(std::istream& in);

enum class SourceKind { Synthetic, Csv };

struct DataSource {
    SourceKind kind = SourceKind::Synthetic;
    SynthKind synth_kind = SynthKind::Seasonal;
    std::size_t length = 2000;
    std::size_t features = 1;
    std::optional<std::uint64_t> seed;  // defaults to the run seed
    std::optional<double> noise;
    std::filesystem::path csv_path;
    CsvOptions csv;
};

struct RunConfig {
    DataSource data;
    DatasetOptions dataset;
    TrainConfig train;
    std::optional<std::uint64_t> seed;
    std::size_t rank = 1;
    std::filesystem::path out_dir = "out";
    std::size_t decompose_start = 0;
    std::vector<std::size_t> bench_lengths{1000, 2000, 4000, 8000};
    std::size_t bench_features = 8;
    std::size_t bench_rank = 4;
    std::filesystem::path checkpoint;
    int threads = 0;  // 0: OpenMP default, 1: serial kernels
    bool report_timing = false;

    /// Every recognized key with its effective value, for report echoes.
    KeyValues echo() const;
};

/// Builds a RunConfig from defaults, then `file_values`, then `overrides`.
/// Relative paths in the file resolve against `base_dir`.
RunConfig make_run_config(const KeyValues& file_values, const KeyValues& overrides,
                          const std::filesystem::path& base_dir);

RunConfig load_run_config(const std::filesystem::path& path, const KeyValues& overrides);

} // namespace sparsetime
