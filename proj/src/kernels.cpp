#include "sparse_time/kernels.hpp"

#include <omp.h>

#include <stdexcept>

namespace sparsetime {

namespace {

void accumulate(ParamTensors& into, const ParamTensors& g) {
    for (std::size_t i = 0; i < 3; ++i) {
        auto dst = into.w[i].values();
        auto src = g.w[i].values();
        for (std::size_t k = 0; k < dst.size(); ++k) {
            dst[k] += src[k];
        }
        for (std::size_t k = 0; k < into.b[i].size(); ++k) {
            into.b[i][k] += g.b[i][k];
        }
        into.theta[i] += g.theta[i];
    }
    for (std::size_t k = 0; k < into.w_o.size(); ++k) {
        into.w_o[k] += g.w_o[k];
    }
    into.b_o += g.b_o;
}

void scale(ParamTensors& t, double s) {
    for_each_tensor(t, [s](std::string_view, std::span<double> v) {
        for (double& x : v) {
            x *= s;
        }
    });
}

BackwardResult sample_gradient(const ModelParams& p, const Sample& sample) {
    const ForwardTrace trace = forward(p, sample.components);
    return backward(p, sample.components, trace, sample.target);
}

BatchGradient finish(const ModelParams& p, std::span<const BackwardResult> per_sample) {
    if (per_sample.empty()) {
        throw std::invalid_argument("batch_gradient: empty batch");
    }
    BatchGradient out{0.0, zero_gradients(p)};
    for (const BackwardResult& r : per_sample) {
        out.loss += r.loss;
        accumulate(out.grads, r.grads);
    }
    const double inv = 1.0 / static_cast<double>(per_sample.size());
    out.loss *= inv;
    scale(out.grads, inv);
    return out;
}

} // namespace

namespace serial {

BatchGradient batch_gradient(const ModelParams& p, std::span<const Sample> samples,
                             std::span<const std::size_t> indices) {
    std::vector<BackwardResult> per_sample;
    per_sample.reserve(indices.size());
    for (std::size_t idx : indices) {
        per_sample.push_back(sample_gradient(p, samples[idx]));
    }
    return finish(p, per_sample);
}

std::vector<double> predict(const ModelParams& p, std::span<const Sample> samples) {
    std::vector<double> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out[i] = forward(p, samples[i].components).y_hat;
    }
    return out;
}

std::vector<Decomposition> decompose_windows(std::span<const Window> windows,
                                             std::size_t smooth_window) {
    std::vector<Decomposition> out;
    out.reserve(windows.size());
    for (const Window& w : windows) {
        out.push_back(decompose_experiment(w.x, smooth_window));
    }
    return out;
}

} // namespace serial

namespace omp {

BatchGradient batch_gradient(const ModelParams& p, std::span<const Sample> samples,
                             std::span<const std::size_t> indices) {
    std::vector<BackwardResult> per_sample(indices.size());
    const auto n = static_cast<std::ptrdiff_t>(indices.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        per_sample[static_cast<std::size_t>(i)] =
            sample_gradient(p, samples[indices[static_cast<std::size_t>(i)]]);
    }
    return finish(p, per_sample);
}

std::vector<double> predict(const ModelParams& p, std::span<const Sample> samples) {
    std::vector<double> out(samples.size());
    const auto n = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        out[k] = forward(p, samples[k].components).y_hat;
    }
    return out;
}

std::vector<Decomposition> decompose_windows(std::span<const Window> windows,
                                             std::size_t smooth_window) {
    std::vector<Decomposition> out(windows.size());
    const auto n = static_cast<std::ptrdiff_t>(windows.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        out[k] = decompose_experiment(windows[k].x, smooth_window);
    }
    return out;
}

} // namespace omp

BatchGradient batch_gradient(const ModelParams& p, std::span<const Sample> samples,
                             std::span<const std::size_t> indices, Execution exec) {
    return exec == Execution::Parallel ? omp::batch_gradient(p, samples, indices)
                                       : serial::batch_gradient(p, samples, indices);
}

std::vector<double> predict(const ModelParams& p, std::span<const Sample> samples, Execution exec) {
    return exec == Execution::Parallel ? omp::predict(p, samples) : serial::predict(p, samples);
}

std::vector<double> targets(std::span<const Sample> samples) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const Sample& s : samples) {
        out.push_back(s.target);
    }
    return out;
}

} // namespace sparsetime
