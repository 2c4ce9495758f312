#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seizurenet/ingest/synthetic.hpp"
#include "seizurenet/net/model.hpp"
#include "seizurenet/segment/stft.hpp"
#include "seizurenet/segment/timing.hpp"
#include "seizurenet/serialization.hpp"
#include "seizurenet/train/trainer.hpp"

namespace seizurenet::pipeline {

// The 18 bipolar derivations kept from CHB-MIT recordings, in tensor order.
const std::vector<std::string>& default_montage();

enum class SourceKind { Synthetic, Edf };

struct DataSource {
  SourceKind kind = SourceKind::Synthetic;
  std::string edf_dir;       // Edf: directory holding the files listed in the summary
  std::string summary_path;  // Edf: CHB-MIT "-summary.txt"
  ingest::SyntheticSpec synthetic;
};

// All randomness derives from these three seeds.
struct Seeds {
  std::uint64_t data = 7;
  std::uint64_t init = 1;
  std::uint64_t train = 3;
};

struct PipelineConfig {
  DataSource data;
  std::vector<std::string> montage = default_montage();
  // Unset sections are derived: synthetic timing is the clinical default
  // compressed by seconds_per_hour, and STFT frames default to one second
  // with half-second hop at the data's sampling rate.
  std::optional<segment::TimingPolicy> timing;
  std::optional<segment::StftConfig> stft;
  net::ModelConfig model;  // input shape is taken from the dataset
  std::optional<net::Dim3> model_input;
  train::TrainConfig train;
  Seeds seeds;
  std::string output_dir = "out";

  segment::TimingPolicy resolved_timing() const;
  segment::StftConfig resolved_stft(double fs) const;
  // Channels read from each source file.
  std::vector<std::string> channels() const;
  net::ModelConfig resolved_model(const segment::SampleShape& shape) const;
  train::TrainConfig resolved_train() const;
  ingest::SyntheticSpec resolved_synthetic() const;
};

PipelineConfig parse_config(const Json& j);
PipelineConfig load_config(const std::string& path);
Json to_json(const PipelineConfig& config);

// Built-in configuration whose synthetic data separates the classes: three
// leading seizures with an 18 Hz, gain-3 preictal signature.
PipelineConfig synthetic_default_config();

// SHA-256 of the canonical JSON form.
std::string config_digest(const PipelineConfig& config);
// Digest of only the parts that determine the dataset cache.
std::string data_digest(const PipelineConfig& config);

}  // namespace seizurenet::pipeline
