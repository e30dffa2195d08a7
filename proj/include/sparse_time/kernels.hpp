#pragma once

// Batch kernels over independent samples. Each has a serial reference and an
// OpenMP version; both reduce per-sample results in sample order, so their
// outputs are bit-identical.

#include "sparse_time/data.hpp"
#include "sparse_time/model.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace sparsetime {

enum class Execution { Serial, Parallel };

struct BatchGradient {
    double loss = 0.0;  // mean squared error over the batch
    Gradients grads;    // mean over the batch
};

/// Mean loss and gradient over samples[indices[i]].
BatchGradient batch_gradient(const ModelParams& p, std::span<const Sample> samples,
                             std::span<const std::size_t> indices, Execution exec);

namespace serial {
BatchGradient batch_gradient(const ModelParams& p, std::span<const Sample> samples,
                             std::span<const std::size_t> indices);
std::vector<double> predict(const ModelParams& p, std::span<const Sample> samples);
std::vector<Decomposition> decompose_windows(std::span<const Window> windows,
                                             std::size_t smooth_window);
} // namespace serial

namespace omp {
BatchGradient batch_gradient(const ModelParams& p, std::span<const Sample> samples,
                             std::span<const std::size_t> indices);
std::vector<double> predict(const ModelParams& p, std::span<const Sample> samples);
std::vector<Decomposition> decompose_windows(std::span<const Window> windows,
                                             std::size_t smooth_window);
} // namespace omp

/// Last-row prediction for every sample.
std::vector<double> predict(const ModelParams& p, std::span<const Sample> samples, Execution exec);

std::vector<double> targets(std::span<const Sample> samples);

} // namespace sparsetime
