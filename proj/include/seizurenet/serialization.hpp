#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "seizurenet/ingest/synthetic.hpp"
#include "seizurenet/net/model.hpp"
#include "seizurenet/segment/dataset.hpp"
#include "seizurenet/train/trainer.hpp"

// JSON forms of the configuration and report types. Readers are strict:
// unknown keys and wrong types raise ConfigError naming the key path;
// missing keys keep their defaults.
namespace seizurenet {

using Json = nlohmann::ordered_json;

Json to_json(const ingest::SyntheticSpec& spec);
Json to_json(const segment::TimingPolicy& policy);
Json to_json(const segment::StftConfig& cfg);
Json to_json(const net::ModelConfig& cfg);
Json to_json(const train::TrainConfig& cfg);
Json to_json(const train::FoldReport& report);
Json to_json(const train::BoxStats& stats);
Json to_json(const train::Aggregate& aggregate);

ingest::SyntheticSpec synthetic_spec_from_json(const nlohmann::ordered_json& j, const std::string& path);
segment::TimingPolicy timing_policy_from_json(const nlohmann::ordered_json& j, const std::string& path);
segment::StftConfig stft_config_from_json(const nlohmann::ordered_json& j, const std::string& path);
net::ModelConfig model_config_from_json(const nlohmann::ordered_json& j, const std::string& path);
train::TrainConfig train_config_from_json(const nlohmann::ordered_json& j, const std::string& path);
train::FoldReport fold_report_from_json(const nlohmann::ordered_json& j, const std::string& path);

}  // namespace seizurenet
