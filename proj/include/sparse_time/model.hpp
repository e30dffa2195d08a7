#pragma once

#include "sparse_time/decompose.hpp"
#include "sparse_time/matrix.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace sparsetime {

/// Index of a component in theta/alpha and in the projection arrays.
enum class Component : std::size_t { Saliency = 0, Memory = 1, Trend = 2 };

inline constexpr std::array<Component, 3> kComponents{Component::Saliency, Component::Memory,
                                                      Component::Trend};

/// Every learnable tensor of the predictor. Shared by parameters, gradients
/// and optimizer moments so all three stay shape-aligned.
struct ParamTensors {
    std::array<Matrix, 3> w;               // d x h per component
    std::array<std::vector<double>, 3> b;  // h per component
    std::array<double, 3> theta{};         // softmax logits
    std::vector<double> w_o;               // h
    double b_o = 0.0;

    std::size_t input_dim() const noexcept { return w[0].rows(); }
    std::size_t hidden_dim() const noexcept { return w[0].cols(); }
    std::size_t parameter_count() const noexcept;

    Matrix& weight(Component c) { return w[static_cast<std::size_t>(c)]; }
    const Matrix& weight(Component c) const { return w[static_cast<std::size_t>(c)]; }

    /// Same shapes, all zeros.
    ParamTensors zeros_like() const;

    bool operator==(const ParamTensors&) const = default;
};

/// Calls f(name, span) for each tensor in a fixed order.
template <class Tensors, class F>
void for_each_tensor(Tensors& t, F&& f) {
    static constexpr std::array<std::string_view, 3> w_names{"w_s", "w_m", "w_g"};
    static constexpr std::array<std::string_view, 3> b_names{"b_s", "b_m", "b_g"};
    for (std::size_t i = 0; i < 3; ++i) {
        f(w_names[i], t.w[i].values());
    }
    for (std::size_t i = 0; i < 3; ++i) {
        f(b_names[i], std::span(t.b[i]));
    }
    f(std::string_view("theta"), std::span(t.theta));
    f(std::string_view("w_o"), std::span(t.w_o));
    f(std::string_view("b_o"), std::span(&t.b_o, 1));
}

struct ModelParams : ParamTensors {};
struct Gradients : ParamTensors {};

Gradients zero_gradients(const ParamTensors& like);

/// Closed-form parameter count 3(dh + h) + 3 + h + 1.
constexpr std::size_t parameter_count(std::size_t d, std::size_t h) {
    return 3 * (d * h + h) + 3 + h + 1;
}

/// Uniform(-1/sqrt(d), 1/sqrt(d)) input projections, Uniform(-1/sqrt(h), 1/sqrt(h))
/// output layer, zero biases and zero logits.
ModelParams init_params(std::size_t d, std::size_t h, std::uint64_t seed);

std::array<double, 3> softmax_alpha(const std::array<double, 3>& theta);

struct ForwardTrace {
    std::array<Matrix, 3> h;  // L x h per component
    std::array<double, 3> alpha{};
    Matrix fused;
    Matrix activated;
    std::vector<double> outputs;  // one prediction per row
    double y_hat = 0.0;           // last row's prediction
};

ForwardTrace forward(const ModelParams& p, const Decomposition& dec);

struct BackwardResult {
    double loss = 0.0;
    Gradients grads;
};

/// Squared error of the last-row prediction and its exact gradient.
/// The ReLU derivative at zero is taken as zero.
BackwardResult backward(const ModelParams& p, const Decomposition& dec, const ForwardTrace& trace,
                        double target);

} // namespace sparsetime
