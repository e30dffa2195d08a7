#include "sparse_time/checkpoint.hpp"

#include "sparse_time/errors.hpp"

#include <fstream>
#include <sstream>

namespace sparsetime {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kFormat = "sparse-time-checkpoint";

ordered_json matrix_json(const Matrix& m) {
    ordered_json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["data"] = std::vector<double>(m.values().begin(), m.values().end());
    return j;
}

Matrix matrix_from(const json& j) {
    return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                  j.at("data").get<std::vector<double>>());
}

} // namespace

ordered_json to_json(const TrainConfig& cfg) {
    ordered_json j;
    j["learning_rate"] = cfg.learning_rate;
    j["weight_decay"] = cfg.weight_decay;
    j["decay_mode"] = to_string(cfg.decay_mode);
    j["beta1"] = cfg.beta1;
    j["beta2"] = cfg.beta2;
    j["eps"] = cfg.eps;
    j["batch_size"] = cfg.batch_size;
    j["max_epochs"] = cfg.max_epochs;
    j["patience"] = cfg.patience;
    j["seed"] = cfg.seed;
    j["smooth_window"] = cfg.smooth_window;
    j["hidden_dim"] = cfg.hidden_dim;
    return j;
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig cfg;
    cfg.learning_rate = j.at("learning_rate").get<double>();
    cfg.weight_decay = j.at("weight_decay").get<double>();
    cfg.decay_mode = j.at("decay_mode").get<std::string>() == "l2" ? DecayMode::L2
                                                                   : DecayMode::Decoupled;
    cfg.beta1 = j.at("beta1").get<double>();
    cfg.beta2 = j.at("beta2").get<double>();
    cfg.eps = j.at("eps").get<double>();
    cfg.batch_size = j.at("batch_size").get<std::size_t>();
    cfg.max_epochs = j.at("max_epochs").get<std::size_t>();
    cfg.patience = j.at("patience").get<std::size_t>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.smooth_window = j.at("smooth_window").get<std::size_t>();
    cfg.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    return cfg;
}

std::string serialize_checkpoint(const Checkpoint& c) {
    const ModelParams& p = c.params;
    ordered_json j;
    j["format"] = kFormat;
    j["version"] = kCheckpointVersion;
    j["input_dim"] = p.input_dim();
    j["hidden_dim"] = p.hidden_dim();
    j["window_length"] = c.dataset.window_length;
    j["smooth_window"] = c.dataset.smooth_window;
    j["target_feature"] = c.dataset.target_feature;
    j["norm_stats"] = {{"mean", c.stats.mean},
                       {"stddev", c.stats.stddev},
                       {"epsilon", c.stats.epsilon}};
    ordered_json params;
    params["w_s"] = matrix_json(p.w[0]);
    params["w_m"] = matrix_json(p.w[1]);
    params["w_g"] = matrix_json(p.w[2]);
    params["b_s"] = p.b[0];
    params["b_m"] = p.b[1];
    params["b_g"] = p.b[2];
    params["theta"] = p.theta;
    params["w_o"] = p.w_o;
    params["b_o"] = p.b_o;
    j["params"] = std::move(params);
    j["train_config"] = to_json(c.train_config);
    return j.dump(2) + "\n";
}

Checkpoint deserialize_checkpoint(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(DataError::Kind::Malformed, std::string("checkpoint: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kFormat) {
            throw DataError(DataError::Kind::Malformed, "checkpoint: unknown format tag");
        }
        const int version = j.at("version").get<int>();
        if (version != kCheckpointVersion) {
            throw DataError(DataError::Kind::Malformed,
                            "checkpoint: unsupported version " + std::to_string(version));
        }
        Checkpoint c;
        const json& params = j.at("params");
        c.params.w[0] = matrix_from(params.at("w_s"));
        c.params.w[1] = matrix_from(params.at("w_m"));
        c.params.w[2] = matrix_from(params.at("w_g"));
        c.params.b[0] = params.at("b_s").get<std::vector<double>>();
        c.params.b[1] = params.at("b_m").get<std::vector<double>>();
        c.params.b[2] = params.at("b_g").get<std::vector<double>>();
        c.params.theta = params.at("theta").get<std::array<double, 3>>();
        c.params.w_o = params.at("w_o").get<std::vector<double>>();
        c.params.b_o = params.at("b_o").get<double>();

        const std::size_t d = j.at("input_dim").get<std::size_t>();
        const std::size_t h = j.at("hidden_dim").get<std::size_t>();
        for (std::size_t i = 0; i < 3; ++i) {
            if (c.params.w[i].rows() != d || c.params.w[i].cols() != h || c.params.b[i].size() != h) {
                throw DataError(DataError::Kind::Malformed, "checkpoint: inconsistent tensor shapes");
            }
        }
        if (c.params.w_o.size() != h) {
            throw DataError(DataError::Kind::Malformed, "checkpoint: inconsistent output layer");
        }

        const json& ns = j.at("norm_stats");
        c.stats.mean = ns.at("mean").get<std::vector<double>>();
        c.stats.stddev = ns.at("stddev").get<std::vector<double>>();
        c.stats.epsilon = ns.at("epsilon").get<double>();
        c.dataset.window_length = j.at("window_length").get<std::size_t>();
        c.dataset.smooth_window = j.at("smooth_window").get<std::size_t>();
        c.dataset.target_feature = j.at("target_feature").get<std::size_t>();
        c.train_config = train_config_from_json(j.at("train_config"));
        return c;
    } catch (const json::exception& e) {
        throw DataError(DataError::Kind::Malformed, std::string("checkpoint: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError(DataError::Kind::MissingFile, "cannot write checkpoint " + path.string());
    }
    out << serialize_checkpoint(c);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError(DataError::Kind::MissingFile, "cannot open checkpoint " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_checkpoint(buf.str());
}

} // namespace sparsetime
