#include "sparse_time/cli.hpp"

#include "sparse_time/checkpoint.hpp"
#include "sparse_time/config.hpp"
#include "sparse_time/data.hpp"
#include "sparse_time/decompose.hpp"
#include "sparse_time/errors.hpp"
#include "sparse_time/eval.hpp"
#include "sparse_time/format.hpp"
#include "sparse_time/kernels.hpp"
#include "sparse_time/model.hpp"
#include "sparse_time/train.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <omp.h>

#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace sparsetime {

namespace fs = std::filesystem;

namespace {

// Files are produced in memory first and written only after every step has
// succeeded, so a rejected run leaves nothing behind.
using Artifacts = std::map<std::string, std::string>;

void write_artifacts(const fs::path& dir, const Artifacts& files) {
    fs::create_directories(dir);
    for (const auto& [name, content] : files) {
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) {
            throw DataError(DataError::Kind::MissingFile, "cannot write " + (dir / name).string());
        }
        f << content;
    }
}

struct LoadedData {
    Matrix raw;
    std::vector<std::string> names;
    std::size_t target_feature = 0;
};

LoadedData load_data(const RunConfig& cfg) {
    LoadedData out;
    if (cfg.data.kind == SourceKind::Csv) {
        if (cfg.data.csv_path.empty()) {
            throw ConfigError("data.csv.path is required when data.source = csv");
        }
        if (cfg.data.csv.target_column.empty()) {
            throw ConfigError("data.csv.target is required when data.source = csv");
        }
        RawTable table = ingest_csv(cfg.data.csv_path, cfg.data.csv);
        out.raw = std::move(table.values);
        out.names = std::move(table.columns);
        out.target_feature = table.target_index;
    } else {
        if (cfg.data.length < 20 || cfg.data.features < 1) {
            throw ConfigError("synthetic data needs length >= 20 and features >= 1");
        }
        const std::uint64_t seed = cfg.data.seed.value_or(cfg.seed.value_or(0));
        out.raw = synth_series(cfg.data.synth_kind, cfg.data.length, cfg.data.features, seed,
                               SynthOptions{cfg.data.noise});
        for (std::size_t j = 0; j < cfg.data.features; ++j) {
            out.names.push_back("x" + std::to_string(j));
        }
        out.target_feature = cfg.dataset.target_feature;
        if (out.target_feature >= cfg.data.features) {
            throw ConfigError("data.target_index out of range for the synthetic feature count");
        }
    }
    return out;
}

void validate_common(const RunConfig& cfg) {
    if (cfg.dataset.window_length < 2) {
        throw ConfigError("window must be >= 2");
    }
    if (cfg.dataset.smooth_window == 0 || cfg.dataset.smooth_window % 2 == 0) {
        throw ConfigError("smooth_window must be odd and >= 1");
    }
    try {
        cfg.train.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (cfg.threads < 0) {
        throw ConfigError("threads must be >= 0");
    }
}

Execution execution_for(const RunConfig& cfg) {
    if (cfg.threads > 0) {
        omp_set_num_threads(cfg.threads);
    }
    return cfg.threads == 1 ? Execution::Serial : Execution::Parallel;
}

DatasetOptions dataset_options(const RunConfig& cfg, std::size_t target_feature) {
    DatasetOptions o = cfg.dataset;
    o.target_feature = target_feature;
    return o;
}

nlohmann::ordered_json config_echo(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    for (const auto& [k, v] : cfg.echo()) {
        j[k] = v;
    }
    return j;
}

std::string csv_header(const std::string& first, const std::vector<std::string>& names,
                       const std::vector<std::string>& suffixes) {
    std::string h = first;
    for (const auto& n : names) {
        for (const auto& s : suffixes) {
            h += "," + n + s;
        }
    }
    return h + "\n";
}

std::string dataset_manifest(const SplitDataset& ds, const std::vector<std::string>& names) {
    nlohmann::ordered_json j;
    j["format"] = "sparse-time-dataset";
    j["version"] = 1;
    j["columns"] = names;
    j["target_feature"] = ds.target_feature;
    j["window_length"] = ds.window_length;
    j["smooth_window"] = ds.smooth_window;
    j["norm_stats"] = {{"mean", ds.stats.mean},
                       {"stddev", ds.stats.stddev},
                       {"epsilon", ds.stats.epsilon}};
    auto range = [](RowRange r) { return nlohmann::ordered_json::array({r.begin, r.end}); };
    j["splits"] = {{"train", range(ds.ranges.train)},
                   {"validation", range(ds.ranges.validation)},
                   {"test", range(ds.ranges.test)}};
    j["samples"] = {{"train", ds.train.size()},
                    {"validation", ds.validation.size()},
                    {"test", ds.test.size()}};
    return j.dump(2) + "\n";
}

// ----------------------------------------------------------------- commands

Artifacts cmd_decompose(const RunConfig& cfg) {
    validate_common(cfg);
    const LoadedData data = load_data(cfg);
    const std::size_t L = cfg.dataset.window_length;
    const std::size_t d = data.raw.cols();
    if (cfg.decompose_start + L > data.raw.rows()) {
        throw ConfigError("decompose.start + window exceeds the series length");
    }
    if (cfg.rank < 1 || cfg.rank > std::min(L, d)) {
        throw ConfigError("rank must lie in [1, min(window, features)] = [1, " +
                          std::to_string(std::min(L, d)) + "]");
    }
    const ChronoSplit ranges = chrono_split(data.raw.rows());
    const Matrix normalized = fit_norm_stats(data.raw, ranges.train).apply(data.raw);
    Matrix window(L, d);
    for (std::size_t t = 0; t < L; ++t) {
        for (std::size_t j = 0; j < d; ++j) {
            window(t, j) = normalized(cfg.decompose_start + t, j);
        }
    }

    const Decomposition exp = decompose_experiment(window, cfg.dataset.smooth_window);
    const SaliencyWeights weights = saliency_weights(window);
    const Matrix projected = saliency_project(window, weights);
    const Matrix memory = memory_project(window, cfg.rank);
    const FrequencySplit split = split_frequencies(window, cfg.dataset.smooth_window);

    Artifacts files;
    {
        std::ostringstream o;
        o << csv_header("t", data.names, {"_input", "_saliency", "_memory", "_trend"});
        for (std::size_t t = 0; t < L; ++t) {
            o << cfg.decompose_start + t;
            for (std::size_t j = 0; j < d; ++j) {
                o << ',' << format_double(window(t, j)) << ',' << format_double(exp.s(t, j)) << ','
                  << format_double(exp.m(t, j)) << ',' << format_double(exp.g(t, j));
            }
            o << '\n';
        }
        files["components.csv"] = o.str();
    }
    {
        std::ostringstream o;
        o << "t,weight\n";
        for (std::size_t t = 0; t < L; ++t) {
            o << cfg.decompose_start + t << ',' << format_double(weights.w[t]) << '\n';
        }
        files["projection_weights.csv"] = o.str();
    }
    {
        std::ostringstream o;
        o << csv_header("t", data.names, {""});
        for (std::size_t t = 0; t < L; ++t) {
            o << cfg.decompose_start + t;
            for (std::size_t j = 0; j < d; ++j) {
                o << ',' << format_double(projected(t, j));
            }
            o << '\n';
        }
        files["projection_saliency.csv"] = o.str();
    }
    {
        std::ostringstream o;
        o << csv_header("direction", data.names, {""});
        for (std::size_t r = 0; r < memory.rows(); ++r) {
            o << r;
            for (std::size_t j = 0; j < d; ++j) {
                o << ',' << format_double(memory(r, j));
            }
            o << '\n';
        }
        files["projection_memory.csv"] = o.str();
    }
    {
        std::ostringstream o;
        o << csv_header("t", data.names, {"_input", "_low", "_high"});
        for (std::size_t t = 0; t < L; ++t) {
            o << cfg.decompose_start + t;
            for (std::size_t j = 0; j < d; ++j) {
                o << ',' << format_double(window(t, j)) << ',' << format_double(split.low(t, j))
                  << ',' << format_double(split.high(t, j));
            }
            o << '\n';
        }
        files["frequency_split.csv"] = o.str();
    }
    return files;
}

Artifacts cmd_train(const RunConfig& cfg) {
    validate_common(cfg);
    if (!cfg.seed) {
        throw ConfigError("train requires --seed");
    }
    const Execution exec = execution_for(cfg);
    const LoadedData data = load_data(cfg);
    const SplitDataset ds = build_dataset(data.raw, dataset_options(cfg, data.target_feature));
    const ModelParams init = init_params(data.raw.cols(), cfg.train.hidden_dim, cfg.train.seed);
    TrainConfig tcfg = cfg.train;
    tcfg.execution = exec;
    const TrainResult result = train(init, ds, tcfg);

    EvalReport report;
    report.model = evaluate_splits(result.params, ds, exec);
    report.naive = naive_splits(ds);
    report.alpha = softmax_alpha(result.params.theta);
    report.parameter_count = result.params.parameter_count();
    report.best_epoch = result.log.best_epoch;
    report.stop_reason = result.log.stop_reason;
    if (cfg.report_timing) {
        report.forward_seconds = measure_forward_seconds(result.params, ds.test);
    }
    report.config = config_echo(cfg);

    Checkpoint ckpt{result.params, cfg.train, ds.stats, dataset_options(cfg, data.target_feature)};
    Artifacts files;
    files["checkpoint.json"] = serialize_checkpoint(ckpt);
    files["train_log.jsonl"] = result.log.to_jsonl();
    files["eval_report.json"] = to_json(report).dump(2) + "\n";
    files["dataset.json"] = dataset_manifest(ds, data.names);
    return files;
}

Artifacts cmd_predict(const RunConfig& cfg) {
    validate_common(cfg);
    if (cfg.checkpoint.empty()) {
        throw ConfigError("predict requires --checkpoint or predict.checkpoint");
    }
    const Execution exec = execution_for(cfg);
    const Checkpoint ckpt = load_checkpoint(cfg.checkpoint);
    const LoadedData data = load_data(cfg);
    if (data.raw.cols() != ckpt.params.input_dim()) {
        throw DataError(DataError::Kind::Malformed,
                        "data has " + std::to_string(data.raw.cols()) +
                            " features, checkpoint expects " +
                            std::to_string(ckpt.params.input_dim()));
    }
    const SplitDataset ds = build_dataset(data.raw, ckpt.dataset, ckpt.stats);

    std::ostringstream o;
    o << "split,first_row,target,prediction,target_raw,prediction_raw\n";
    const std::size_t tf = ckpt.dataset.target_feature;
    auto emit = [&](const char* name, const std::vector<Sample>& samples) {
        const std::vector<double> y_hat = predict(ckpt.params, samples, exec);
        for (std::size_t i = 0; i < samples.size(); ++i) {
            o << name << ',' << samples[i].first_row << ',' << format_double(samples[i].target)
              << ',' << format_double(y_hat[i]) << ','
              << format_double(ds.stats.invert_value(samples[i].target, tf)) << ','
              << format_double(ds.stats.invert_value(y_hat[i], tf)) << '\n';
        }
    };
    emit("train", ds.train);
    emit("validation", ds.validation);
    emit("test", ds.test);
    return {{"predictions.csv", o.str()}};
}

Artifacts cmd_ablate(const RunConfig& cfg) {
    validate_common(cfg);
    if (!cfg.seed) {
        throw ConfigError("ablate requires --seed");
    }
    const Execution exec = execution_for(cfg);
    const LoadedData data = load_data(cfg);
    const SplitDataset ds = build_dataset(data.raw, dataset_options(cfg, data.target_feature));
    TrainConfig tcfg = cfg.train;
    tcfg.execution = exec;
    const std::vector<AblationRow> rows = run_ablation(ds, tcfg);
    return {{"ablation.csv", ablation_csv(rows)}};
}

Artifacts cmd_bench(const RunConfig& cfg) {
    validate_common(cfg);
    if (cfg.bench_lengths.empty()) {
        throw ConfigError("bench.lengths must list at least one length");
    }
    for (std::size_t i = 0; i < cfg.bench_lengths.size(); ++i) {
        if (cfg.bench_lengths[i] < 20 || (i > 0 && cfg.bench_lengths[i] <= cfg.bench_lengths[i - 1])) {
            throw ConfigError("bench.lengths must be increasing and >= 20");
        }
    }
    if (cfg.bench_rank < 1 || cfg.bench_rank > cfg.bench_features) {
        throw ConfigError("bench.rank must lie in [1, bench.features]");
    }
    omp_set_num_threads(1);
    TimingOptions opts;
    opts.hidden_dim = cfg.train.hidden_dim;
    opts.smooth_window = cfg.dataset.smooth_window;
    opts.seed = cfg.seed.value_or(1);
    const auto points = timing_sweep(cfg.bench_lengths, cfg.bench_rank, cfg.bench_features, opts);
    const auto ratios = doubling_ratios(points);

    std::ostringstream o;
    o << "length,seconds,ratio,linear_ok\n";
    bool all_ok = true;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const bool ok = i == 0 || ratios[i] < 2.5;
        all_ok = all_ok && ok;
        o << points[i].length << ',' << format_double(points[i].seconds) << ','
          << (i == 0 ? std::string("NA") : format_double(ratios[i])) << ',' << (ok ? 1 : 0)
          << '\n';
    }
    nlohmann::ordered_json summary;
    summary["input_dim"] = cfg.bench_features;
    summary["hidden_dim"] = cfg.train.hidden_dim;
    summary["rank"] = cfg.bench_rank;
    summary["parameter_count"] =
        init_params(cfg.bench_features, cfg.train.hidden_dim, 0).parameter_count();
    summary["lengths"] = cfg.bench_lengths;
    summary["all_ratios_below_2_5"] = all_ok;
    return {{"bench.csv", o.str()}, {"bench_summary.json", summary.dump(2) + "\n"}};
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Saliency / memory / trend decomposition forecaster", "sparse-time"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::vector<std::string> sets;
    std::string checkpoint;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Key/value run configuration file");
        sub->add_option("--seed", seed, "Random seed for data generation, init and shuffling");
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--set", sets, "Override a config key: key=value (repeatable)");
    };
    auto* decompose = app.add_subcommand("decompose", "Write component traces for one window");
    auto* train_cmd = app.add_subcommand("train", "Train, evaluate and write a checkpoint");
    auto* predict_cmd = app.add_subcommand("predict", "Predict every split from a checkpoint");
    auto* ablate_cmd = app.add_subcommand("ablate", "Train all seven component masks");
    auto* bench = app.add_subcommand("bench", "Time the pipeline across sequence lengths");
    for (auto* sub : {decompose, train_cmd, predict_cmd, ablate_cmd, bench}) {
        add_common(sub);
    }
    predict_cmd->add_option("--checkpoint", checkpoint, "Checkpoint written by train");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        KeyValues overrides;
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) {
                throw ConfigError("--set expects key=value, got '" + s + "'");
            }
            overrides[s.substr(0, eq)] = s.substr(eq + 1);
        }
        if (seed) {
            overrides["seed"] = std::to_string(*seed);
        }
        if (!out_dir.empty()) {
            overrides["out"] = out_dir;
        }
        if (!checkpoint.empty()) {
            overrides["predict.checkpoint"] = checkpoint;
        }
        RunConfig cfg = config_path.empty()
                            ? make_run_config({}, overrides, fs::current_path())
                            : load_run_config(config_path, overrides);

        Artifacts files;
        if (decompose->parsed()) {
            files = cmd_decompose(cfg);
        } else if (train_cmd->parsed()) {
            if (!seed) {
                throw ConfigError("train requires --seed");
            }
            files = cmd_train(cfg);
        } else if (predict_cmd->parsed()) {
            files = cmd_predict(cfg);
        } else if (ablate_cmd->parsed()) {
            if (!seed) {
                throw ConfigError("ablate requires --seed");
            }
            files = cmd_ablate(cfg);
        } else {
            files = cmd_bench(cfg);
        }
        write_artifacts(cfg.out_dir, files);
        for (const auto& [name, _] : files) {
            out << (cfg.out_dir / name).string() << "\n";
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
}

} // namespace sparsetime
