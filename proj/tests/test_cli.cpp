#include <doctest.h>

#include "sparse_time/cli.hpp"
#include "sparse_time/config.hpp"
#include "sparse_time/errors.hpp"
#include "sparse_time/model.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace sparsetime;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("sparse_time_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        rows.push_back(cells);
    }
    return rows;
}

// Small synthetic run settings shared by the slower commands.
const std::vector<std::string> kSmall{"--set", "data.synthetic.length=300", "--set", "window=12",
                                      "--set", "train.max_epochs=4", "--set", "hidden_dim=4"};

std::vector<std::string> with_small(std::vector<std::string> args) {
    args.insert(args.end(), kSmall.begin(), kSmall.end());
    return args;
}

} // namespace

TEST_CASE("parse_key_values: comments, blanks and errors") {
    std::istringstream ok("# header\nschema = 1\n\n  seed=4  # trailing\n");
    const KeyValues kv = parse_key_values(ok);
    CHECK(kv.at("schema") == "1");
    CHECK(kv.at("seed") == "4");

    std::istringstream dup("a = 1\na = 2\n");
    CHECK_THROWS_AS(parse_key_values(dup), ConfigError);
    std::istringstream bad("just words\n");
    CHECK_THROWS_AS(parse_key_values(bad), ConfigError);
}

TEST_CASE("make_run_config: defaults, overrides and validation") {
    const RunConfig base = make_run_config({{"schema", "1"}}, {}, ".");
    CHECK(base.dataset.window_length == 24);
    CHECK(base.train.hidden_dim == 16);
    CHECK(base.train.learning_rate == 1e-3);

    const RunConfig c = make_run_config({{"schema", "1"}, {"window", "8"}},
                                        {{"window", "10"}, {"train.decay_mode", "l2"}}, ".");
    CHECK(c.dataset.window_length == 10);
    CHECK(c.train.decay_mode == DecayMode::L2);
    CHECK(c.echo().at("window") == "10");

    CHECK_THROWS_AS(make_run_config({{"schema", "2"}}, {}, "."), ConfigError);
    CHECK_THROWS_AS(make_run_config({{"schema", "1"}, {"no.such.key", "1"}}, {}, "."), ConfigError);
    CHECK_THROWS_AS(make_run_config({{"schema", "1"}, {"window", "ten"}}, {}, "."), ConfigError);
    CHECK_THROWS_AS(make_run_config({{"schema", "1"}, {"data.synthetic.kind", "x"}}, {}, "."),
                    ConfigError);
}

TEST_CASE("cli decompose: component traces") {
    const fs::path dir = fresh_dir("decompose");
    const Run r = run({"decompose", "--out", dir.string(), "--seed", "3", "--set",
                       "data.synthetic.features=2", "--set", "rank=2"});
    REQUIRE(r.code == kExitOk);
    for (const char* name : {"components.csv", "projection_weights.csv",
                             "projection_saliency.csv", "projection_memory.csv",
                             "frequency_split.csv"}) {
        CHECK(fs::exists(dir / name));
        CHECK(r.out.find(name) != std::string::npos);
    }
    const auto comp = read_csv(dir / "components.csv");
    REQUIRE(comp.size() == 25);
    CHECK(comp[0] == std::vector<std::string>{"t", "x0_input", "x0_saliency", "x0_memory",
                                              "x0_trend", "x1_input", "x1_saliency", "x1_memory",
                                              "x1_trend"});
    CHECK(comp[1][2] == "0");

    const auto split = read_csv(dir / "frequency_split.csv");
    REQUIRE(split.size() == 25);
    for (std::size_t t = 1; t < split.size(); ++t) {
        for (std::size_t j = 0; j < 2; ++j) {
            const double x = std::stod(split[t][1 + 3 * j]);
            const double low = std::stod(split[t][2 + 3 * j]);
            const double high = std::stod(split[t][3 + 3 * j]);
            CHECK(std::abs(low + high - x) <= 1e-15 * (1.0 + std::abs(x) + std::abs(low)));
        }
    }

    const auto weights = read_csv(dir / "projection_weights.csv");
    double sum = 0.0;
    for (std::size_t t = 1; t < weights.size(); ++t) {
        sum += std::stod(weights[t][1]);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(read_csv(dir / "projection_memory.csv").size() == 3);
    fs::remove_all(dir);
}

TEST_CASE("cli decompose: defaults run on a single feature") {
    const fs::path dir = fresh_dir("decompose_default");
    REQUIRE(run({"decompose", "--out", dir.string()}).code == kExitOk);
    CHECK(read_csv(dir / "projection_memory.csv").size() == 2);
    CHECK(run({"decompose", "--out", dir.string(), "--set", "rank=2"}).code == kExitConfig);
    fs::remove_all(dir);
}

TEST_CASE("cli decompose: constant CSV has zero saliency") {
    const fs::path dir = fresh_dir("constant");
    fs::create_directories(dir);
    {
        std::ofstream csv(dir / "flat.csv");
        csv << "time,load\n";
        for (int t = 0; t < 40; ++t) {
            csv << t << ",5.0\n";
        }
        std::ofstream cfg(dir / "run.cfg");
        cfg << "schema = 1\ndata.source = csv\ndata.csv.path = flat.csv\n"
               "data.csv.features = load\ndata.csv.target = load\nrank = 1\n";
    }
    const Run r = run({"decompose", "--config", (dir / "run.cfg").string(), "--out",
                       (dir / "out").string()});
    REQUIRE(r.code == kExitOk);
    const auto comp = read_csv(dir / "out" / "components.csv");
    REQUIRE(comp.size() == 25);
    CHECK(comp[0][2] == "load_saliency");
    for (std::size_t t = 1; t < comp.size(); ++t) {
        CHECK(comp[t][2] == "0");
    }
    const auto weights = read_csv(dir / "out" / "projection_weights.csv");
    CHECK(std::stod(weights[1][1]) == doctest::Approx(1.0 / 24.0).epsilon(1e-15));
    fs::remove_all(dir);
}

TEST_CASE("cli train and predict: artifacts and byte-identical reruns") {
    const fs::path a = fresh_dir("train_a");
    const fs::path b = fresh_dir("train_b");
    REQUIRE(run(with_small({"train", "--seed", "7", "--out", a.string()})).code == kExitOk);
    REQUIRE(run(with_small({"train", "--seed", "7", "--out", b.string()})).code == kExitOk);
    for (const char* name : {"checkpoint.json", "train_log.jsonl", "eval_report.json",
                             "dataset.json"}) {
        REQUIRE(fs::exists(a / name));
        CHECK(slurp(a / name) == slurp(b / name));
    }

    const auto report = nlohmann::json::parse(slurp(a / "eval_report.json"));
    const auto& alpha = report["alpha"];
    CHECK(alpha["saliency"].get<double>() + alpha["memory"].get<double>() +
              alpha["trend"].get<double>() ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(report["parameter_count"] == parameter_count(1, 4));
    CHECK(report["metrics"]["test"].contains("r2"));
    CHECK_FALSE(report.contains("forward_seconds_per_sample"));

    const auto manifest = nlohmann::json::parse(slurp(a / "dataset.json"));
    const std::size_t samples = manifest["samples"]["train"].get<std::size_t>() +
                                manifest["samples"]["validation"].get<std::size_t>() +
                                manifest["samples"]["test"].get<std::size_t>();

    const fs::path p = fresh_dir("predict");
    const Run pr = run(with_small({"predict", "--seed", "7", "--checkpoint",
                                   (a / "checkpoint.json").string(), "--out", p.string()}));
    REQUIRE(pr.code == kExitOk);
    const auto rows = read_csv(p / "predictions.csv");
    CHECK(rows.size() == samples + 1);
    CHECK(rows[0] == std::vector<std::string>{"split", "first_row", "target", "prediction",
                                              "target_raw", "prediction_raw"});
    for (const fs::path& d : {a, b, p}) {
        fs::remove_all(d);
    }
}

TEST_CASE("cli ablate: seven rows over identical splits") {
    const fs::path dir = fresh_dir("ablate");
    REQUIRE(run(with_small({"ablate", "--seed", "2", "--out", dir.string()})).code == kExitOk);
    const auto rows = read_csv(dir / "ablation.csv");
    REQUIRE(rows.size() == 8);
    CHECK(rows[0][0] == "configuration");
    const std::size_t cols = rows[0].size();
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == cols);
        for (std::size_t c = cols - 3; c < cols; ++c) {
            CHECK(rows[i][c] == rows[1][c]);
        }
    }
    CHECK(rows[1][0] == "full");
    CHECK(rows[7][0] == "only_trend");
    fs::remove_all(dir);
}

TEST_CASE("cli bench: summary matches the parameter formula") {
    const fs::path dir = fresh_dir("bench");
    const Run r = run({"bench", "--out", dir.string(), "--set", "bench.lengths=100,200",
                       "--set", "bench.features=3", "--set", "bench.rank=2", "--set",
                       "hidden_dim=5"});
    REQUIRE(r.code == kExitOk);
    const auto summary = nlohmann::json::parse(slurp(dir / "bench_summary.json"));
    CHECK(summary["parameter_count"] == parameter_count(3, 5));
    CHECK(summary["parameter_count"] == 3 * (3 * 5 + 5) + 3 + 5 + 1);
    const auto rows = read_csv(dir / "bench.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][2] == "NA");
    fs::remove_all(dir);
}

TEST_CASE("cli: errors map to exit codes and leave no files") {
    const fs::path dir = fresh_dir("errors");
    Run r = run(with_small({"train", "--out", dir.string()}));
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("--seed") != std::string::npos);
    CHECK_FALSE(fs::exists(dir));

    r = run({"decompose", "--out", dir.string(), "--set", "bogus.key=1"});
    CHECK(r.code == kExitConfig);
    CHECK_FALSE(fs::exists(dir));

    r = run({"decompose", "--out", dir.string(), "--set", "smooth_window=4"});
    CHECK(r.code == kExitConfig);

    r = run({"decompose", "--out", dir.string(), "--set", "data.source=csv", "--set",
             "data.csv.path=/nonexistent.csv", "--set", "data.csv.target=y"});
    CHECK(r.code == kExitData);
    CHECK_FALSE(fs::exists(dir));

    r = run({"train", "--seed", "1", "--out", dir.string(), "--set", "data.synthetic.length=40"});
    CHECK(r.code == kExitData);
    CHECK_FALSE(fs::exists(dir));

    CHECK(run({"frobnicate"}).code == kExitConfig);
    CHECK(run({}).code == kExitConfig);
    CHECK(run({"predict", "--out", dir.string()}).code == kExitConfig);
}

TEST_CASE("cli binary: exit status propagates") {
    const std::string bin = SPARSE_TIME_CLI_PATH;
    CHECK(std::system((bin + " --help > /dev/null").c_str()) == 0);
    const int status = std::system((bin + " train --out /tmp/sparse_time_cli_bin 2> /dev/null").c_str());
    CHECK(WEXITSTATUS(status) == kExitConfig);
}

TEST_CASE("cli train: seasonal model beats persistence on test") {
    const fs::path dir = fresh_dir("seasonal");
    REQUIRE(run({"train", "--seed", "1", "--out", dir.string()}).code == kExitOk);
    const auto report = nlohmann::json::parse(slurp(dir / "eval_report.json"));
    const double model_r2 = report["metrics"]["test"]["r2"].get<double>();
    const double naive_r2 = report["naive_baseline"]["test"]["r2"].get<double>();
    CHECK(model_r2 > naive_r2);
    CHECK(report["metrics"]["test"]["mae"].get<double>() <
          report["naive_baseline"]["test"]["mae"].get<double>());
    fs::remove_all(dir);
}
