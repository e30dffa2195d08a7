#include "sparse_time/train.hpp"

#include "sparse_time/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace sparsetime {

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("learning_rate must be > 0");
    }
    if (!(weight_decay >= 0.0)) {
        throw std::invalid_argument("weight_decay must be >= 0");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw std::invalid_argument("beta1 and beta2 must lie in [0, 1)");
    }
    if (!(eps > 0.0)) {
        throw std::invalid_argument("eps must be > 0");
    }
    if (batch_size < 1) {
        throw std::invalid_argument("batch_size must be >= 1");
    }
    if (patience < 1) {
        throw std::invalid_argument("patience must be >= 1");
    }
    if (max_epochs < 1) {
        throw std::invalid_argument("max_epochs must be >= 1");
    }
    if (hidden_dim < 1) {
        throw std::invalid_argument("hidden_dim must be >= 1");
    }
    if (smooth_window == 0 || smooth_window % 2 == 0) {
        throw std::invalid_argument("smooth_window must be odd and >= 1");
    }
}

OptimizerState OptimizerState::zeros_like(const ModelParams& p) {
    return {p.zeros_like(), p.zeros_like(), 0};
}

double mse_loss(std::span<const double> y, std::span<const double> y_hat) {
    if (y.size() != y_hat.size() || y.empty()) {
        throw std::invalid_argument("mse_loss: lengths " + std::to_string(y.size()) + " and " +
                                    std::to_string(y_hat.size()) + " (need equal, nonzero)");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - y_hat[i];
        sum += r * r;
    }
    return sum / static_cast<double>(y.size());
}

AdamwResult adamw_step(const ModelParams& p, const Gradients& g, const OptimizerState& st,
                       const TrainConfig& cfg) {
    for_each_tensor(g, [](std::string_view name, std::span<const double> v) {
        for (double x : v) {
            if (!std::isfinite(x)) {
                throw NumericalError("adamw_step: non-finite gradient in tensor " +
                                     std::string(name));
            }
        }
    });

    AdamwResult out{p, st};
    out.state.step = st.step + 1;
    const double t = static_cast<double>(out.state.step);
    const double bias1 = 1.0 - std::pow(cfg.beta1, t);
    const double bias2 = 1.0 - std::pow(cfg.beta2, t);
    const double decay = cfg.decay_mode == DecayMode::Decoupled ? cfg.weight_decay : 0.0;

    // Walk the four tensor sets in lockstep; for_each_tensor visits in a fixed order.
    std::vector<std::span<double>> params;
    std::vector<std::span<const double>> grads;
    std::vector<std::span<double>> m1;
    std::vector<std::span<double>> m2;
    for_each_tensor(out.params, [&](std::string_view, std::span<double> v) { params.push_back(v); });
    for_each_tensor(g, [&](std::string_view, std::span<const double> v) { grads.push_back(v); });
    for_each_tensor(out.state.first_moment,
                    [&](std::string_view, std::span<double> v) { m1.push_back(v); });
    for_each_tensor(out.state.second_moment,
                    [&](std::string_view, std::span<double> v) { m2.push_back(v); });

    for (std::size_t k = 0; k < params.size(); ++k) {
        if (grads[k].size() != params[k].size() || m1[k].size() != params[k].size()) {
            throw std::invalid_argument("adamw_step: gradient shapes do not match parameters");
        }
        for (std::size_t i = 0; i < params[k].size(); ++i) {
            const double gi = grads[k][i];
            m1[k][i] = cfg.beta1 * m1[k][i] + (1.0 - cfg.beta1) * gi;
            m2[k][i] = cfg.beta2 * m2[k][i] + (1.0 - cfg.beta2) * gi * gi;
            const double m_hat = m1[k][i] / bias1;
            const double v_hat = m2[k][i] / bias2;
            const double old = params[k][i];
            params[k][i] = old - cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.eps) -
                           cfg.learning_rate * decay * old;
        }
    }
    return out;
}

std::string TrainLog::to_jsonl() const {
    std::string out;
    for (const EpochRecord& e : epochs) {
        nlohmann::ordered_json j;
        j["epoch"] = e.epoch;
        j["train_loss"] = e.train_loss;
        j["validation_loss"] = e.validation_loss;
        j["alpha"] = e.alpha;
        out += j.dump();
        out += '\n';
    }
    return out;
}

double evaluate_loss(const ModelParams& p, std::span<const Sample> samples, Execution exec) {
    const std::vector<double> y_hat = predict(p, samples, exec);
    const std::vector<double> y = targets(samples);
    return mse_loss(y, y_hat);
}

namespace {

void add_l2_gradient(Gradients& g, const ModelParams& p, double lambda) {
    std::vector<std::span<const double>> params;
    for_each_tensor(p, [&](std::string_view, std::span<const double> v) { params.push_back(v); });
    std::size_t k = 0;
    for_each_tensor(g, [&](std::string_view, std::span<double> v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] += 2.0 * lambda * params[k][i];
        }
        ++k;
    });
}

} // namespace

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                    std::mt19937_64& rng) {
    if (batch_size == 0) {
        throw std::invalid_argument("epoch_batches: batch_size must be >= 1");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const auto first = order.begin() + static_cast<std::ptrdiff_t>(start);
        const auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + batch_size));
        batches.emplace_back(first, last);
    }
    return batches;
}

TrainResult train(const ModelParams& init, const SplitDataset& data, const TrainConfig& cfg) {
    return train(init, data.train, data.validation, cfg);
}

TrainResult train(const ModelParams& init, std::span<const Sample> train_samples,
                  std::span<const Sample> validation_samples, const TrainConfig& cfg) {
    cfg.validate();
    if (train_samples.empty() || validation_samples.empty()) {
        throw DataError(DataError::Kind::Insufficient,
                        "train: training and validation splits must be nonempty");
    }

    std::mt19937_64 rng(cfg.seed);

    ModelParams params = init;
    OptimizerState state = OptimizerState::zeros_like(params);
    TrainResult result{params, {}};
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t stale = 0;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        double loss_sum = 0.0;
        for (const auto& batch : epoch_batches(train_samples.size(), cfg.batch_size, rng)) {
            BatchGradient bg = batch_gradient(params, train_samples, batch, cfg.execution);
            if (!std::isfinite(bg.loss)) {
                throw NumericalError("train: non-finite loss at epoch " + std::to_string(epoch));
            }
            loss_sum += bg.loss * static_cast<double>(batch.size());
            if (cfg.decay_mode == DecayMode::L2 && cfg.weight_decay > 0.0) {
                add_l2_gradient(bg.grads, params, cfg.weight_decay);
            }
            AdamwResult step = adamw_step(params, bg.grads, state, cfg);
            params = std::move(step.params);
            state = std::move(step.state);
        }

        const double val_loss = evaluate_loss(params, validation_samples, cfg.execution);
        if (!std::isfinite(val_loss)) {
            throw NumericalError("train: non-finite validation loss at epoch " +
                                 std::to_string(epoch));
        }
        result.log.epochs.push_back(
            {epoch, loss_sum / static_cast<double>(train_samples.size()), val_loss,
             softmax_alpha(params.theta)});

        if (val_loss < best_loss - 1e-12) {
            best_loss = val_loss;
            result.params = params;
            result.log.best_epoch = epoch;
            stale = 0;
        } else if (++stale >= cfg.patience) {
            result.log.stop_reason = StopReason::EarlyStop;
            return result;
        }
    }
    result.log.stop_reason = StopReason::MaxEpochs;
    return result;
}

std::string to_string(StopReason r) {
    return r == StopReason::EarlyStop ? "early_stop" : "max_epochs";
}

std::string to_string(DecayMode m) {
    return m == DecayMode::L2 ? "l2" : "decoupled";
}

} // namespace sparsetime
