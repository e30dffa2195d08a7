#include "sparse_time/eval.hpp"

#include "sparse_time/format.hpp"
#include "sparse_time/kernels.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sparsetime {

Metrics compute_metrics(std::span<const double> y, std::span<const double> y_hat) {
    if (y.size() != y_hat.size() || y.empty()) {
        throw std::invalid_argument("compute_metrics: lengths " + std::to_string(y.size()) +
                                    " and " + std::to_string(y_hat.size()) +
                                    " (need equal, nonzero)");
    }
    const double n = static_cast<double>(y.size());
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = y[i] - y_hat[i];
        abs_sum += std::abs(r);
        sq_sum += r * r;
        mean += y[i];
    }
    mean /= n;
    double total = 0.0;
    for (double v : y) {
        total += (v - mean) * (v - mean);
    }
    Metrics m;
    m.n = y.size();
    m.mae = abs_sum / n;
    m.rmse = std::sqrt(sq_sum / n);
    if (total > 0.0) {
        m.r2 = 1.0 - sq_sum / total;
    }
    return m;
}

nlohmann::ordered_json to_json(const Metrics& m) {
    nlohmann::ordered_json j;
    j["mae"] = m.mae;
    j["rmse"] = m.rmse;
    j["r2"] = m.r2 ? nlohmann::ordered_json(*m.r2) : nlohmann::ordered_json(nullptr);
    j["n"] = m.n;
    return j;
}

std::string AblationConfig::name() const {
    const int count = int(use_saliency) + int(use_memory) + int(use_trend);
    if (count == 3) {
        return "full";
    }
    if (count == 2) {
        return !use_saliency ? "no_saliency" : !use_memory ? "no_memory" : "no_trend";
    }
    if (count == 1) {
        return use_saliency ? "only_saliency" : use_memory ? "only_memory" : "only_trend";
    }
    return "none";
}

std::array<AblationConfig, 7> AblationConfig::all() {
    return {{{true, true, true},
             {false, true, true},
             {true, false, true},
             {true, true, false},
             {false, true, false},
             {true, false, false},
             {false, false, true}}};
}

Decomposition ablate(const Decomposition& dec, const AblationConfig& cfg) {
    if (!cfg.use_saliency && !cfg.use_memory && !cfg.use_trend) {
        throw std::invalid_argument("ablate: at least one component must stay enabled");
    }
    Decomposition out = dec;
    if (!cfg.use_saliency) {
        out.s = Matrix(dec.s.rows(), dec.s.cols());
    }
    if (!cfg.use_memory) {
        out.m = Matrix(dec.m.rows(), dec.m.cols());
    }
    if (!cfg.use_trend) {
        out.g = Matrix(dec.g.rows(), dec.g.cols());
    }
    return out;
}

std::vector<Sample> ablate(std::span<const Sample> samples, const AblationConfig& cfg) {
    std::vector<Sample> out;
    out.reserve(samples.size());
    for (const Sample& s : samples) {
        out.push_back({ablate(s.components, cfg), s.target, s.first_row});
    }
    return out;
}

std::vector<double> naive_predictions(std::span<const Sample> samples, std::size_t target_feature) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const Sample& s : samples) {
        const Matrix& window = s.components.m;
        out.push_back(window(window.rows() - 1, target_feature));
    }
    return out;
}

Metrics naive_baseline(std::span<const Sample> samples, std::size_t target_feature) {
    const std::vector<double> y = targets(samples);
    return compute_metrics(y, naive_predictions(samples, target_feature));
}

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Pipeline {
    const Matrix& x;
    const ModelParams& params;
    std::size_t k;
    std::size_t smooth_window;

    double run() const {
        const SaliencyWeights w = saliency_weights(x);
        const Matrix s = saliency_project(x, w);
        const Matrix m = memory_project(x, k);
        const Matrix g = trend_smooth(x, smooth_window);
        const Decomposition dec = decompose_experiment(x, smooth_window);
        const ForwardTrace tr = forward(params, dec);
        return s(0, 0) + m(0, 0) + g(0, 0) + tr.y_hat;
    }
};

double time_loop(const Pipeline& p, std::size_t loops) {
    volatile double sink = 0.0;
    const auto start = Clock::now();
    for (std::size_t i = 0; i < loops; ++i) {
        sink = sink + p.run();
    }
    const std::chrono::duration<double> elapsed = Clock::now() - start;
    return elapsed.count();
}

} // namespace

std::vector<TimingPoint> timing_sweep(std::span<const std::size_t> lengths, std::size_t k,
                                      std::size_t d, const TimingOptions& options) {
    for (std::size_t i = 1; i < lengths.size(); ++i) {
        if (lengths[i] <= lengths[i - 1]) {
            throw std::invalid_argument("timing_sweep: lengths must be increasing");
        }
    }
    if (options.repeats == 0) {
        throw std::invalid_argument("timing_sweep: need at least one repeat");
    }
    const ModelParams params = init_params(d, options.hidden_dim, options.seed);
    std::vector<TimingPoint> out;
    std::size_t loops = 0;
    for (std::size_t T : lengths) {
        const Matrix x = synth_series(SynthKind::RandomWalk, T, d, options.seed);
        const Pipeline pipeline{x, params, k, options.smooth_window};
        for (std::size_t i = 0; i < options.warmups; ++i) {
            time_loop(pipeline, 1);
        }
        if (loops == 0) {
            const double once = std::max(time_loop(pipeline, 1), 1e-7);
            loops = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::ceil(options.min_repeat_seconds / once)));
        }
        std::vector<double> samples;
        for (std::size_t r = 0; r < options.repeats; ++r) {
            samples.push_back(time_loop(pipeline, loops) / static_cast<double>(loops));
        }
        out.push_back({T, median(std::move(samples))});
    }
    return out;
}

std::vector<double> doubling_ratios(std::span<const TimingPoint> points) {
    std::vector<double> out(points.size(), 0.0);
    for (std::size_t i = 1; i < points.size(); ++i) {
        out[i] = points[i].seconds / points[i - 1].seconds;
    }
    return out;
}

SplitMetrics evaluate_splits(const ModelParams& p, const SplitDataset& data, Execution exec) {
    auto one = [&](std::span<const Sample> s) {
        return compute_metrics(targets(s), predict(p, s, exec));
    };
    return {one(data.train), one(data.validation), one(data.test)};
}

SplitMetrics naive_splits(const SplitDataset& data) {
    return {naive_baseline(data.train, data.target_feature),
            naive_baseline(data.validation, data.target_feature),
            naive_baseline(data.test, data.target_feature)};
}

double measure_forward_seconds(const ModelParams& p, std::span<const Sample> samples) {
    std::vector<double> runs;
    for (int r = 0; r < 9; ++r) {
        const auto start = Clock::now();
        volatile double sink = 0.0;
        for (const Sample& s : samples) {
            sink = sink + forward(p, s.components).y_hat;
        }
        const std::chrono::duration<double> elapsed = Clock::now() - start;
        runs.push_back(elapsed.count() / static_cast<double>(std::max<std::size_t>(1, samples.size())));
    }
    return median(std::move(runs));
}

nlohmann::ordered_json to_json(const EvalReport& report) {
    auto splits = [](const SplitMetrics& s) {
        nlohmann::ordered_json j;
        j["train"] = to_json(s.train);
        j["validation"] = to_json(s.validation);
        j["test"] = to_json(s.test);
        return j;
    };
    nlohmann::ordered_json j;
    j["metrics"] = splits(report.model);
    j["naive_baseline"] = splits(report.naive);
    j["alpha"] = {{"saliency", report.alpha[0]},
                  {"memory", report.alpha[1]},
                  {"trend", report.alpha[2]}};
    j["parameter_count"] = report.parameter_count;
    j["best_epoch"] = report.best_epoch;
    j["stop_reason"] = to_string(report.stop_reason);
    if (report.forward_seconds) {
        j["forward_seconds_per_sample"] = *report.forward_seconds;
    }
    j["config"] = report.config;
    return j;
}

std::vector<AblationRow> run_ablation(const SplitDataset& data, const TrainConfig& cfg) {
    const std::uint64_t train_hash = fingerprint(data.train);
    const std::uint64_t val_hash = fingerprint(data.validation);
    const std::uint64_t test_hash = fingerprint(data.test);
    const std::size_t d = data.train.front().components.m.cols();
    const ModelParams init = init_params(d, cfg.hidden_dim, cfg.seed);

    std::vector<AblationRow> rows;
    for (const AblationConfig& mask : AblationConfig::all()) {
        const std::vector<Sample> train_set = ablate(data.train, mask);
        const std::vector<Sample> val_set = ablate(data.validation, mask);
        const std::vector<Sample> test_set = ablate(data.test, mask);
        const TrainResult result = train(init, train_set, val_set, cfg);
        AblationRow row;
        row.config = mask;
        row.validation = compute_metrics(targets(val_set), predict(result.params, val_set, cfg.execution));
        row.test = compute_metrics(targets(test_set), predict(result.params, test_set, cfg.execution));
        row.alpha = softmax_alpha(result.params.theta);
        row.best_epoch = result.log.best_epoch;
        row.train_hash = train_hash;
        row.validation_hash = val_hash;
        row.test_hash = test_hash;
        rows.push_back(row);
    }
    return rows;
}

std::string ablation_csv(std::span<const AblationRow> rows) {
    std::ostringstream out;
    out << "configuration,saliency,memory,trend,val_mae,val_rmse,val_r2,test_mae,test_rmse,"
           "test_r2,alpha_saliency,alpha_memory,alpha_trend,best_epoch,train_hash,"
           "validation_hash,test_hash\n";
    auto hex = [](std::uint64_t h) {
        std::ostringstream s;
        s << std::hex << h;
        return s.str();
    };
    for (const AblationRow& r : rows) {
        out << r.config.name() << ',' << int(r.config.use_saliency) << ','
            << int(r.config.use_memory) << ',' << int(r.config.use_trend) << ','
            << format_double(r.validation.mae) << ',' << format_double(r.validation.rmse) << ','
            << format_double(r.validation.r2) << ',' << format_double(r.test.mae) << ','
            << format_double(r.test.rmse) << ',' << format_double(r.test.r2) << ','
            << format_double(r.alpha[0]) << ',' << format_double(r.alpha[1]) << ','
            << format_double(r.alpha[2]) << ',' << r.best_epoch << ',' << hex(r.train_hash) << ','
            << hex(r.validation_hash) << ',' << hex(r.test_hash) << '\n';
    }
    return out.str();
}

} // namespace sparsetime
