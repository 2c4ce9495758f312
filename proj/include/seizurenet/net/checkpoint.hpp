#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seizurenet/net/model.hpp"

namespace seizurenet::net {

// A trained model on disk: a JSON manifest plus the parameters as flat
// little-endian float64 values in ParamLayout order.
struct Checkpoint {
  ModelConfig config;
  ModelParams params;
  std::size_t epoch = 0;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  // Per-frequency-bin input standardization the model was trained with.
  std::vector<double> norm_mean;
  std::vector<double> norm_std;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::string& manifest_path, const std::string& params_path);
Checkpoint load_checkpoint(const std::string& manifest_path, const std::string& params_path);

}  // namespace seizurenet::net
