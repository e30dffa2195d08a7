#pragma once

#include "sparse_time/matrix.hpp"

#include <cstddef>
#include <vector>

namespace sparsetime {

/// Nonnegative per-time-step weights summing to one.
struct SaliencyWeights {
    std::vector<double> w;
};

enum class DecompositionMode { Projection, Experiment };

/// Saliency, memory and trend components of one input.
///
/// Experiment mode: all three are L x d. Projection mode: `s` and `g` are
/// T x d, `m` is the k x d principal-subspace coordinates.
struct Decomposition {
    Matrix s;
    Matrix m;
    Matrix g;
    DecompositionMode mode = DecompositionMode::Experiment;

    bool operator==(const Decomposition&) const = default;
};

struct FrequencySplit {
    Matrix low;
    Matrix high;
};

/// w_t proportional to ||x_t - x_{t-1}||_2 with the first difference taken as
/// zero. A series with no change at all gets uniform weights.
SaliencyWeights saliency_weights(const Matrix& x);

/// Row t of the result is w_t * row t of x (D_w X).
Matrix saliency_project(const Matrix& x, const SaliencyWeights& weights);

/// U_k^T X, the coordinates of X in its leading rank-k left singular subspace.
Matrix memory_project(const Matrix& x, std::size_t k);

/// Centered moving average per column over an odd window. Near the edges the
/// window shrinks to the indices that exist.
Matrix trend_smooth(const Matrix& x, std::size_t window);

/// low = trend_smooth(x, window), high = x - low.
FrequencySplit split_frequencies(const Matrix& x, std::size_t window);

/// Element-wise form used for training: s = |x_t - x_{t-1}| (row 0 zero),
/// m = x, g = trend_smooth(x, smooth_window).
Decomposition decompose_experiment(const Matrix& x_window, std::size_t smooth_window);

/// Operator form: s = D_w X, m = U_k^T X, g = trend_smooth(X).
Decomposition decompose_projection(const Matrix& x, std::size_t k, std::size_t smooth_window);

} // namespace sparsetime
