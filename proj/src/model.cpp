#include "sparse_time/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace sparsetime {

std::size_t ParamTensors::parameter_count() const noexcept {
    std::size_t n = 0;
    for_each_tensor(*this, [&](std::string_view, auto span) { n += span.size(); });
    return n;
}

ParamTensors ParamTensors::zeros_like() const {
    ParamTensors out;
    for (std::size_t i = 0; i < 3; ++i) {
        out.w[i] = Matrix(w[i].rows(), w[i].cols());
        out.b[i].assign(b[i].size(), 0.0);
    }
    out.w_o.assign(w_o.size(), 0.0);
    return out;
}

Gradients zero_gradients(const ParamTensors& like) {
    Gradients g;
    static_cast<ParamTensors&>(g) = like.zeros_like();
    return g;
}

ModelParams init_params(std::size_t d, std::size_t h, std::uint64_t seed) {
    if (d == 0 || h == 0) {
        throw std::invalid_argument("init_params: d and h must be >= 1");
    }
    std::mt19937_64 rng(seed);
    const double in_bound = 1.0 / std::sqrt(static_cast<double>(d));
    const double out_bound = 1.0 / std::sqrt(static_cast<double>(h));
    std::uniform_real_distribution<double> in_dist(-in_bound, in_bound);
    std::uniform_real_distribution<double> out_dist(-out_bound, out_bound);

    ModelParams p;
    for (std::size_t i = 0; i < 3; ++i) {
        p.w[i] = Matrix(d, h);
        for (double& v : p.w[i].values()) {
            v = in_dist(rng);
        }
        p.b[i].assign(h, 0.0);
    }
    p.w_o.resize(h);
    for (double& v : p.w_o) {
        v = out_dist(rng);
    }
    return p;
}

std::array<double, 3> softmax_alpha(const std::array<double, 3>& theta) {
    const double mx = std::max({theta[0], theta[1], theta[2]});
    std::array<double, 3> out{};
    double sum = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        out[i] = std::exp(theta[i] - mx);
        sum += out[i];
    }
    for (double& a : out) {
        a /= sum;
    }
    return out;
}

namespace {

const Matrix& component_input(const Decomposition& dec, std::size_t i) {
    switch (i) {
    case 0:
        return dec.s;
    case 1:
        return dec.m;
    default:
        return dec.g;
    }
}

void check_shapes(const ModelParams& p, const Decomposition& dec) {
    if (dec.mode != DecompositionMode::Experiment) {
        throw std::invalid_argument("forward: model consumes experiment-mode decompositions");
    }
    const std::size_t d = p.input_dim();
    const std::size_t L = dec.m.rows();
    for (std::size_t i = 0; i < 3; ++i) {
        const Matrix& z = component_input(dec, i);
        if (z.cols() != d || z.rows() != L || L == 0) {
            throw std::invalid_argument("forward: component " + std::to_string(i) + " has shape " +
                                        shape_string(z) + ", model expects Lx" +
                                        std::to_string(d) + " with L=" + std::to_string(L));
        }
    }
}

} // namespace

ForwardTrace forward(const ModelParams& p, const Decomposition& dec) {
    check_shapes(p, dec);
    const std::size_t L = dec.m.rows();
    const std::size_t h = p.hidden_dim();

    ForwardTrace tr;
    tr.alpha = softmax_alpha(p.theta);
    tr.fused = Matrix(L, h);
    for (std::size_t i = 0; i < 3; ++i) {
        tr.h[i] = matmul(component_input(dec, i), p.w[i]);
        for (std::size_t r = 0; r < L; ++r) {
            auto hr = tr.h[i].row(r);
            auto fr = tr.fused.row(r);
            for (std::size_t j = 0; j < h; ++j) {
                hr[j] += p.b[i][j];
                fr[j] += tr.alpha[i] * hr[j];
            }
        }
    }
    tr.activated = tr.fused;
    for (double& v : tr.activated.values()) {
        v = v > 0.0 ? v : 0.0;
    }
    tr.outputs.resize(L);
    for (std::size_t r = 0; r < L; ++r) {
        double y = p.b_o;
        const auto ar = tr.activated.row(r);
        for (std::size_t j = 0; j < h; ++j) {
            y += ar[j] * p.w_o[j];
        }
        tr.outputs[r] = y;
    }
    tr.y_hat = tr.outputs.back();
    return tr;
}

BackwardResult backward(const ModelParams& p, const Decomposition& dec, const ForwardTrace& trace,
                        double target) {
    const std::size_t h = p.hidden_dim();
    const std::size_t d = p.input_dim();
    const std::size_t last = trace.fused.rows() - 1;

    BackwardResult out;
    out.grads = zero_gradients(p);
    const double residual = trace.y_hat - target;
    out.loss = residual * residual;
    const double dy = 2.0 * residual;

    out.grads.b_o = dy;
    std::vector<double> d_fused(h);
    const auto act = trace.activated.row(last);
    const auto fused = trace.fused.row(last);
    for (std::size_t j = 0; j < h; ++j) {
        out.grads.w_o[j] = dy * act[j];
        d_fused[j] = fused[j] > 0.0 ? dy * p.w_o[j] : 0.0;
    }

    std::array<double, 3> d_alpha{};
    for (std::size_t i = 0; i < 3; ++i) {
        const auto z = component_input(dec, i).row(last);
        const auto hi = trace.h[i].row(last);
        const double a = trace.alpha[i];
        for (std::size_t j = 0; j < h; ++j) {
            d_alpha[i] += d_fused[j] * hi[j];
            out.grads.b[i][j] = a * d_fused[j];
        }
        Matrix& gw = out.grads.w[i];
        for (std::size_t r = 0; r < d; ++r) {
            if (z[r] == 0.0) {
                continue;
            }
            auto gr = gw.row(r);
            for (std::size_t j = 0; j < h; ++j) {
                gr[j] = z[r] * a * d_fused[j];
            }
        }
    }
    // Softmax Jacobian: d theta_i = alpha_i (d alpha_i - sum_k alpha_k d alpha_k).
    double mean = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        mean += trace.alpha[i] * d_alpha[i];
    }
    for (std::size_t i = 0; i < 3; ++i) {
        out.grads.theta[i] = trace.alpha[i] * (d_alpha[i] - mean);
    }
    return out;
}

} // namespace sparsetime
