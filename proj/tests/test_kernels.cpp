#include <doctest.h>

#include "sparse_time/kernels.hpp"
#include "sparse_time/train.hpp"

#include <numeric>
#include <stdexcept>

using namespace sparsetime;

namespace {

SplitDataset small_dataset() {
    const Matrix raw = synth_series(SynthKind::SpikeDominant, 400, 3, 6);
    return build_dataset(raw, DatasetOptions{16, 5, 2});
}

} // namespace

TEST_CASE("batch_gradient: parallel equals serial bit for bit") {
    const SplitDataset ds = small_dataset();
    const ModelParams p = init_params(3, 8, 2);
    std::vector<std::size_t> idx(ds.train.size());
    std::iota(idx.begin(), idx.end(), 0);
    const BatchGradient a = serial::batch_gradient(p, ds.train, idx);
    const BatchGradient b = omp::batch_gradient(p, ds.train, idx);
    CHECK(a.loss == b.loss);
    CHECK(a.grads == b.grads);

    const std::vector<std::size_t> some{5, 0, 17, 3};
    CHECK(batch_gradient(p, ds.train, some, Execution::Parallel).grads ==
          batch_gradient(p, ds.train, some, Execution::Serial).grads);
    CHECK_THROWS_AS(serial::batch_gradient(p, ds.train, std::vector<std::size_t>{}),
                    std::invalid_argument);
    CHECK_THROWS_AS(omp::batch_gradient(p, ds.train, std::vector<std::size_t>{}),
                    std::invalid_argument);
}

TEST_CASE("batch_gradient: mean of per-sample gradients") {
    const SplitDataset ds = small_dataset();
    const ModelParams p = init_params(3, 4, 5);
    const std::vector<std::size_t> idx{2, 9};
    const BatchGradient batch = serial::batch_gradient(p, ds.train, idx);
    double loss = 0.0;
    double b_o = 0.0;
    for (std::size_t i : idx) {
        const Sample& s = ds.train[i];
        const BackwardResult r = backward(p, s.components, forward(p, s.components), s.target);
        loss += r.loss;
        b_o += r.grads.b_o;
    }
    CHECK(batch.loss == doctest::Approx(loss / 2.0).epsilon(1e-15));
    CHECK(batch.grads.b_o == doctest::Approx(b_o / 2.0).epsilon(1e-15));
}

TEST_CASE("predict and decompose_windows: parallel equals serial") {
    const SplitDataset ds = small_dataset();
    const ModelParams p = init_params(3, 8, 2);
    CHECK(serial::predict(p, ds.test) == omp::predict(p, ds.test));

    const Matrix raw = synth_series(SynthKind::Seasonal, 300, 2, 1);
    const auto windows = make_windows(raw, 20, 0);
    CHECK(serial::decompose_windows(windows, 5) == omp::decompose_windows(windows, 5));
}

TEST_CASE("train: parallel and serial execution produce identical runs") {
    const SplitDataset ds = small_dataset();
    TrainConfig cfg;
    cfg.max_epochs = 4;
    cfg.hidden_dim = 6;
    cfg.seed = 3;
    const ModelParams init = init_params(3, 6, 3);
    const TrainResult a = train(init, ds, cfg);
    cfg.execution = Execution::Parallel;
    const TrainResult b = train(init, ds, cfg);
    CHECK(a.params == b.params);
    CHECK(a.log.to_jsonl() == b.log.to_jsonl());
}
