// Serial vs OpenMP timings for the batch kernels.
//
//   sparse_time_bench [samples] [window] [features] [hidden]

#include "sparse_time/data.hpp"
#include "sparse_time/kernels.hpp"
#include "sparse_time/model.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <vector>

using namespace sparsetime;

namespace {

template <class F>
double best_of(int repeats, F&& f) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto start = std::chrono::steady_clock::now();
        f();
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
        best = std::min(best, dt.count());
    }
    return best;
}

std::size_t arg_or(int argc, char** argv, int i, std::size_t fallback) {
    return argc > i ? static_cast<std::size_t>(std::strtoull(argv[i], nullptr, 10)) : fallback;
}

} // namespace

int main(int argc, char** argv) {
    const std::size_t n = arg_or(argc, argv, 1, 4096);
    const std::size_t L = arg_or(argc, argv, 2, 48);
    const std::size_t d = arg_or(argc, argv, 3, 8);
    const std::size_t h = arg_or(argc, argv, 4, 32);

    const Matrix x = synth_series(SynthKind::Seasonal, n + L + 1, d, 7);
    const std::vector<Window> windows = make_windows(x, L, 0);
    std::vector<Sample> samples;
    for (const Window& w : windows) {
        samples.push_back({decompose_experiment(w.x, 5), w.target, 0});
    }
    std::vector<std::size_t> all(samples.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const ModelParams p = init_params(d, h, 3);

    std::printf("threads=%d samples=%zu L=%zu d=%zu h=%zu\n", omp_get_max_threads(),
                samples.size(), L, d, h);
    std::printf("%-20s %12s %12s %8s %s\n", "kernel", "serial[s]", "omp[s]", "speedup", "match");

    {
        BatchGradient a, b;
        const double ts = best_of(5, [&] { a = serial::batch_gradient(p, samples, all); });
        const double tp = best_of(5, [&] { b = omp::batch_gradient(p, samples, all); });
        const bool same = a.loss == b.loss && static_cast<const ParamTensors&>(a.grads) ==
                                                   static_cast<const ParamTensors&>(b.grads);
        std::printf("%-20s %12.6f %12.6f %8.2f %s\n", "batch_gradient", ts, tp, ts / tp,
                    same ? "bitwise" : "DIFFERS");
    }
    {
        std::vector<double> a, b;
        const double ts = best_of(5, [&] { a = serial::predict(p, samples); });
        const double tp = best_of(5, [&] { b = omp::predict(p, samples); });
        std::printf("%-20s %12.6f %12.6f %8.2f %s\n", "predict", ts, tp, ts / tp,
                    a == b ? "bitwise" : "DIFFERS");
    }
    {
        std::vector<Decomposition> a, b;
        const double ts = best_of(5, [&] { a = serial::decompose_windows(windows, 5); });
        const double tp = best_of(5, [&] { b = omp::decompose_windows(windows, 5); });
        std::printf("%-20s %12.6f %12.6f %8.2f %s\n", "decompose_windows", ts, tp, ts / tp,
                    a == b ? "bitwise" : "DIFFERS");
    }
    return 0;
}
