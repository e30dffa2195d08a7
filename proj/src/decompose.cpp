#include "sparse_time/decompose.hpp"

#include "sparse_time/svd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sparsetime {

namespace {

void require_window(std::size_t window) {
    if (window == 0 || window % 2 == 0) {
        throw std::invalid_argument("smoothing window must be odd and >= 1, got " +
                                    std::to_string(window));
    }
}

} // namespace

SaliencyWeights saliency_weights(const Matrix& x) {
    if (x.rows() == 0) {
        throw std::invalid_argument("saliency_weights: empty input");
    }
    const std::size_t T = x.rows();
    SaliencyWeights out{std::vector<double>(T, 0.0)};
    double total = 0.0;
    for (std::size_t t = 1; t < T; ++t) {
        double sq = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) {
            const double diff = x(t, j) - x(t - 1, j);
            sq += diff * diff;
        }
        out.w[t] = std::sqrt(sq);
        total += out.w[t];
    }
    if (total == 0.0) {
        std::fill(out.w.begin(), out.w.end(), 1.0 / static_cast<double>(T));
        return out;
    }
    for (double& w : out.w) {
        w /= total;
    }
    return out;
}

Matrix saliency_project(const Matrix& x, const SaliencyWeights& weights) {
    if (weights.w.size() != x.rows()) {
        throw std::invalid_argument("saliency_project: " + std::to_string(weights.w.size()) +
                                    " weights for " + shape_string(x) + " input");
    }
    Matrix out = x;
    for (std::size_t t = 0; t < out.rows(); ++t) {
        for (double& v : out.row(t)) {
            v *= weights.w[t];
        }
    }
    return out;
}

Matrix memory_project(const Matrix& x, std::size_t k) {
    const TruncatedSvd svd = truncated_svd(x, k);
    return matmul(transpose(svd.u), x);
}

Matrix trend_smooth(const Matrix& x, std::size_t window) {
    require_window(window);
    const std::size_t T = x.rows();
    const std::size_t half = window / 2;
    Matrix out(T, x.cols());
    for (std::size_t t = 0; t < T; ++t) {
        const std::size_t lo = t >= half ? t - half : 0;
        const std::size_t hi = std::min(T - 1, t + half);
        const double count = static_cast<double>(hi - lo + 1);
        auto dst = out.row(t);
        for (std::size_t i = lo; i <= hi; ++i) {
            const auto src = x.row(i);
            for (std::size_t j = 0; j < dst.size(); ++j) {
                dst[j] += src[j];
            }
        }
        for (double& v : dst) {
            v /= count;
        }
    }
    return out;
}

FrequencySplit split_frequencies(const Matrix& x, std::size_t window) {
    Matrix low = trend_smooth(x, window);
    Matrix high = x - low;
    return {std::move(low), std::move(high)};
}

Decomposition decompose_experiment(const Matrix& x_window, std::size_t smooth_window) {
    if (x_window.rows() < 2) {
        throw std::invalid_argument("decompose_experiment: window needs at least 2 rows, got " +
                                    shape_string(x_window));
    }
    Matrix s(x_window.rows(), x_window.cols());
    for (std::size_t t = 1; t < x_window.rows(); ++t) {
        for (std::size_t j = 0; j < x_window.cols(); ++j) {
            s(t, j) = std::abs(x_window(t, j) - x_window(t - 1, j));
        }
    }
    return {std::move(s), x_window, trend_smooth(x_window, smooth_window),
            DecompositionMode::Experiment};
}

Decomposition decompose_projection(const Matrix& x, std::size_t k, std::size_t smooth_window) {
    return {saliency_project(x, saliency_weights(x)), memory_project(x, k),
            trend_smooth(x, smooth_window), DecompositionMode::Projection};
}

} // namespace sparsetime
