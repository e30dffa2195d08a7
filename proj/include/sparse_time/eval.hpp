#pragma once

#include "sparse_time/data.hpp"
#include "sparse_time/decompose.hpp"
#include "sparse_time/model.hpp"
#include "sparse_time/train.hpp"

#include <json.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sparsetime {

struct Metrics {
    double mae = 0.0;
    double rmse = 0.0;
    std::optional<double> r2;  // empty when the targets have zero variance
    std::size_t n = 0;
};

Metrics compute_metrics(std::span<const double> y, std::span<const double> y_hat);

nlohmann::ordered_json to_json(const Metrics& m);

struct AblationConfig {
    bool use_saliency = true;
    bool use_memory = true;
    bool use_trend = true;

    /// "full", "no_saliency", ..., "only_trend".
    std::string name() const;

    /// The seven nonempty masks, full first, in the order of the ablation table.
    static std::array<AblationConfig, 7> all();

    bool operator==(const AblationConfig&) const = default;
};

/// Replaces disabled components with zeros of the same shape.
Decomposition ablate(const Decomposition& dec, const AblationConfig& cfg);

std::vector<Sample> ablate(std::span<const Sample> samples, const AblationConfig& cfg);

/// Persistence forecast: predict the last observed value of the target feature.
std::vector<double> naive_predictions(std::span<const Sample> samples, std::size_t target_feature);
Metrics naive_baseline(std::span<const Sample> samples, std::size_t target_feature);

struct TimingOptions {
    std::size_t repeats = 9;
    std::size_t warmups = 2;
    std::size_t hidden_dim = 16;
    std::size_t smooth_window = 5;
    std::uint64_t seed = 1;
    /// Minimum wall time of one measured repeat at the smallest length; the
    /// pipeline is looped a fixed number of times per repeat to reach it.
    double min_repeat_seconds = 0.02;
};

struct TimingPoint {
    std::size_t length = 0;
    double seconds = 0.0;  // median seconds per pipeline invocation
};

/// Median-of-repeats wall time of saliency weighting, rank-k memory
/// projection, trend smoothing, element-wise decomposition and a forward pass
/// over a T x d series. Runs single-threaded.
std::vector<TimingPoint> timing_sweep(std::span<const std::size_t> lengths, std::size_t k,
                                      std::size_t d, const TimingOptions& options = {});

/// time[i] / time[i-1] for consecutive points; first entry is 0.
std::vector<double> doubling_ratios(std::span<const TimingPoint> points);

struct SplitMetrics {
    Metrics train;
    Metrics validation;
    Metrics test;
};

struct EvalReport {
    SplitMetrics model;
    SplitMetrics naive;
    std::array<double, 3> alpha{};
    std::size_t parameter_count = 0;
    std::size_t best_epoch = 0;
    StopReason stop_reason = StopReason::MaxEpochs;
    std::optional<double> forward_seconds;  // per sample, only when measured
    nlohmann::ordered_json config;
};

SplitMetrics evaluate_splits(const ModelParams& p, const SplitDataset& data, Execution exec);
SplitMetrics naive_splits(const SplitDataset& data);

/// Median wall time of one forward pass over the test samples.
double measure_forward_seconds(const ModelParams& p, std::span<const Sample> samples);

nlohmann::ordered_json to_json(const EvalReport& report);

struct AblationRow {
    AblationConfig config;
    Metrics validation;
    Metrics test;
    std::array<double, 3> alpha{};
    std::size_t best_epoch = 0;
    std::uint64_t train_hash = 0;
    std::uint64_t validation_hash = 0;
    std::uint64_t test_hash = 0;
};

/// Trains one model per mask from the same initial parameters and data.
std::vector<AblationRow> run_ablation(const SplitDataset& data, const TrainConfig& cfg);

/// Header plus one row per configuration.
std::string ablation_csv(std::span<const AblationRow> rows);

} // namespace sparsetime
