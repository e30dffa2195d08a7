#pragma once

#include "sparse_time/data.hpp"
#include "sparse_time/kernels.hpp"
#include "sparse_time/model.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace sparsetime {

/// How weight decay enters the update.
enum class DecayMode {
    Decoupled,  // AdamW: theta -= lr * lambda * theta alongside the Adam step
    L2,         // lambda * ||theta||^2 added to the loss, plain Adam step
};

struct TrainConfig {
    double learning_rate = 1e-3;
    double weight_decay = 1e-4;
    DecayMode decay_mode = DecayMode::Decoupled;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 100;
    std::size_t patience = 10;
    std::uint64_t seed = 0;
    std::size_t smooth_window = 5;
    std::size_t hidden_dim = 16;
    Execution execution = Execution::Serial;

    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const;
};

struct OptimizerState {
    ParamTensors first_moment;
    ParamTensors second_moment;
    std::uint64_t step = 0;

    static OptimizerState zeros_like(const ModelParams& p);
};

double mse_loss(std::span<const double> y, std::span<const double> y_hat);

struct AdamwResult {
    ModelParams params;
    OptimizerState state;
};

/// One AdamW update with bias-corrected moments:
///   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps) - lr * lambda * theta
/// The decay term is dropped when cfg.decay_mode is L2. Throws NumericalError
/// naming the tensor if any gradient is not finite.
AdamwResult adamw_step(const ModelParams& p, const Gradients& g, const OptimizerState& st,
                       const TrainConfig& cfg);

enum class StopReason { MaxEpochs, EarlyStop };

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double validation_loss = 0.0;
    std::array<double, 3> alpha{};
};

struct TrainLog {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;  // 1-based, 0 before any epoch completes
    StopReason stop_reason = StopReason::MaxEpochs;

    /// One JSON object per epoch, newline-terminated.
    std::string to_jsonl() const;
};

struct TrainResult {
    ModelParams params;  // parameters at the best validation epoch
    TrainLog log;
};

/// Shuffles 0..n-1 and cuts it into consecutive batches; the last batch keeps
/// the remainder.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                    std::mt19937_64& rng);

/// Mean squared error of last-row predictions.
double evaluate_loss(const ModelParams& p, std::span<const Sample> samples, Execution exec);

/// Shuffled mini-batch AdamW with early stopping on validation MSE.
TrainResult train(const ModelParams& init, const SplitDataset& data, const TrainConfig& cfg);

/// Same loop on explicit sample lists.
TrainResult train(const ModelParams& init, std::span<const Sample> train_samples,
                  std::span<const Sample> validation_samples, const TrainConfig& cfg);

std::string to_string(StopReason r);
std::string to_string(DecayMode m);

} // namespace sparsetime
