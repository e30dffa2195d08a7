#include <doctest.h>

#include "sparse_time/eval.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

using namespace sparsetime;

namespace {

Sample ramp_sample(double start, std::size_t L) {
    Matrix x(L, 1);
    for (std::size_t t = 0; t < L; ++t) {
        x(t, 0) = start + static_cast<double>(t);
    }
    return Sample{Decomposition{Matrix(L, 1), x, x, DecompositionMode::Experiment},
                  start + static_cast<double>(L), 0};
}

} // namespace

TEST_CASE("compute_metrics: examples") {
    const std::vector<double> y{1, 2, 3};
    const Metrics exact = compute_metrics(y, y);
    CHECK(exact.mae == 0.0);
    CHECK(exact.rmse == 0.0);
    CHECK(exact.r2 == 1.0);
    CHECK(exact.n == 3);

    const Metrics mean = compute_metrics(y, std::vector<double>{2, 2, 2});
    CHECK(mean.mae == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(mean.rmse == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));
    CHECK(*mean.r2 == doctest::Approx(0.0));

    const Metrics flat = compute_metrics(std::vector<double>{4, 4}, std::vector<double>{3, 5});
    CHECK(flat.mae == 1.0);
    CHECK_FALSE(flat.r2.has_value());
    CHECK(to_json(flat)["r2"].is_null());

    CHECK_THROWS_AS(compute_metrics(y, std::vector<double>{1}), std::invalid_argument);
    CHECK_THROWS_AS(compute_metrics(std::vector<double>{}, std::vector<double>{}),
                    std::invalid_argument);
}

TEST_CASE("compute_metrics agrees with an extended-precision oracle") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + trial % 50;
        std::vector<double> y(n);
        std::vector<double> y_hat(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = 3.0 * g(rng) + 1.0;
            y_hat[i] = y[i] + g(rng);
        }
        long double abs_sum = 0;
        long double sq_sum = 0;
        long double mean = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const long double e = static_cast<long double>(y[i]) - y_hat[i];
            abs_sum += std::fabs(e);
            sq_sum += e * e;
            mean += y[i];
        }
        mean /= n;
        long double tot = 0;
        for (double v : y) {
            tot += (v - mean) * (v - mean);
        }
        const Metrics m = compute_metrics(y, y_hat);
        CHECK(std::abs(m.mae - static_cast<double>(abs_sum / n)) < 1e-12);
        CHECK(std::abs(m.rmse - static_cast<double>(std::sqrt(sq_sum / n))) < 1e-12);
        CHECK(std::abs(*m.r2 - static_cast<double>(1 - sq_sum / tot)) < 1e-12);
        // R^2 = 1 - MSE / population variance.
        CHECK(std::abs(*m.r2 - (1.0 - m.rmse * m.rmse / static_cast<double>(tot / n))) < 1e-10);
    }
}

TEST_CASE("AblationConfig: names and order") {
    const auto all = AblationConfig::all();
    std::vector<std::string> names;
    for (const auto& c : all) {
        names.push_back(c.name());
    }
    CHECK(names == std::vector<std::string>{"full", "no_saliency", "no_memory", "no_trend",
                                            "only_memory", "only_saliency", "only_trend"});
    CHECK(all[0] == AblationConfig{true, true, true});
}

TEST_CASE("ablate: zeroes only the disabled components") {
    const Matrix s = Matrix::from_rows({{1, 2}, {3, 4}});
    const Matrix m = Matrix::from_rows({{5, 6}, {7, 8}});
    const Matrix g = Matrix::from_rows({{9, 10}, {11, 12}});
    const Decomposition dec{s, m, g, DecompositionMode::Experiment};

    const Decomposition no_s = ablate(dec, AblationConfig{false, true, true});
    CHECK(no_s.s == Matrix(2, 2));
    CHECK(no_s.m == m);
    CHECK(no_s.g == g);
    CHECK(ablate(dec, AblationConfig{}) == dec);

    const Decomposition only_g = ablate(dec, AblationConfig{false, false, true});
    CHECK(only_g.s == Matrix(2, 2));
    CHECK(only_g.m == Matrix(2, 2));
    CHECK(only_g.g == g);

    CHECK_THROWS_AS(ablate(dec, AblationConfig{false, false, false}), std::invalid_argument);

    const std::vector<Sample> samples{Sample{dec, 1.5, 3}};
    const auto masked = ablate(samples, AblationConfig{true, false, true});
    CHECK(masked[0].components.m == Matrix(2, 2));
    CHECK(masked[0].target == 1.5);
    CHECK(masked[0].first_row == 3);
}

TEST_CASE("naive baseline: persistence forecast") {
    const Matrix flat(4, 1, 2.0);
    const std::vector<Sample> constant(
        3, Sample{Decomposition{Matrix(4, 1), flat, flat, DecompositionMode::Experiment}, 2.0, 0});
    const Metrics c = naive_baseline(constant, 0);
    CHECK(c.mae == 0.0);
    CHECK(c.rmse == 0.0);

    std::vector<Sample> ramp;
    for (int i = 0; i < 10; ++i) {
        ramp.push_back(ramp_sample(0.5 * i, 5));
    }
    CHECK(naive_predictions(ramp, 0)[3] == 1.5 + 4.0);
    const Metrics r = naive_baseline(ramp, 0);
    CHECK(r.mae == 1.0);
    CHECK(r.rmse == 1.0);
}

TEST_CASE("timing_sweep: one point per length") {
    TimingOptions opts;
    opts.repeats = 3;
    opts.warmups = 1;
    opts.min_repeat_seconds = 0.001;
    opts.hidden_dim = 4;
    const std::vector<std::size_t> lengths{64, 128, 256};
    const auto points = timing_sweep(lengths, 2, 3, opts);
    REQUIRE(points.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(points[i].length == lengths[i]);
        CHECK(points[i].seconds > 0.0);
    }
    const auto ratios = doubling_ratios(points);
    REQUIRE(ratios.size() == 3);
    CHECK(ratios[0] == 0.0);
    CHECK(ratios[1] == points[1].seconds / points[0].seconds);
}

TEST_CASE("run_ablation: seven configurations over identical data") {
    const Matrix raw = synth_series(SynthKind::Seasonal, 200, 1, 2);
    const SplitDataset ds = build_dataset(raw, DatasetOptions{8, 3, 0});
    TrainConfig cfg;
    cfg.hidden_dim = 4;
    cfg.max_epochs = 3;
    cfg.seed = 1;
    const auto rows = run_ablation(ds, cfg);
    REQUIRE(rows.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) {
        CHECK(rows[i].config == AblationConfig::all()[i]);
        CHECK(rows[i].train_hash == fingerprint(ds.train));
        CHECK(rows[i].validation_hash == rows[0].validation_hash);
        CHECK(rows[i].test_hash == rows[0].test_hash);
        CHECK(rows[i].best_epoch >= 1);
    }
    const std::string csv = ablation_csv(rows);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
    CHECK(csv.rfind("configuration,saliency,memory,trend,val_mae", 0) == 0);
    CHECK(csv.find("\nonly_trend,0,0,1,") != std::string::npos);
}

TEST_CASE("evaluate_splits matches metrics of the predictions") {
    const Matrix raw = synth_series(SynthKind::RandomWalk, 150, 2, 8);
    const SplitDataset ds = build_dataset(raw, DatasetOptions{6, 3, 0});
    const ModelParams p = init_params(2, 4, 3);
    const SplitMetrics sm = evaluate_splits(p, ds, Execution::Serial);
    const Metrics direct =
        compute_metrics(targets(ds.test), predict(p, ds.test, Execution::Serial));
    CHECK(sm.test.mae == direct.mae);
    CHECK(sm.test.rmse == direct.rmse);
    CHECK(naive_splits(ds).validation.mae == naive_baseline(ds.validation, 0).mae);
}
