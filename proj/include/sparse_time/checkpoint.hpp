#pragma once

// Checkpoint file layout (JSON, keys in this order):
//
//   {
//     "format": "sparse-time-checkpoint",
//     "version": 1,
//     "input_dim": d, "hidden_dim": h,
//     "window_length": L, "smooth_window": w, "target_feature": i,
//     "norm_stats": {"mean": [d], "stddev": [d], "epsilon": e},
//     "params": {
//       "w_s" | "w_m" | "w_g": {"rows": d, "cols": h, "data": [d*h row-major]},
//       "b_s" | "b_m" | "b_g": [h],
//       "theta": [3], "w_o": [h], "b_o": x
//     },
//     "train_config": {learning_rate, weight_decay, decay_mode, beta1, beta2,
//                      eps, batch_size, max_epochs, patience, seed,
//                      smooth_window, hidden_dim}
//   }
//
// Numbers are written in shortest round-trip form, so a load reproduces every
// parameter bit-for-bit. Readers reject other formats and versions.

#include "sparse_time/data.hpp"
#include "sparse_time/model.hpp"
#include "sparse_time/train.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace sparsetime {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    ModelParams params;
    TrainConfig train_config;
    NormStats stats;
    DatasetOptions dataset;
};

nlohmann::ordered_json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

std::string serialize_checkpoint(const Checkpoint& c);
Checkpoint deserialize_checkpoint(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace sparsetime
