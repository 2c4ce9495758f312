#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "seizurenet/ingest/recording.hpp"
#include "seizurenet/net/gradcheck.hpp"
#include "seizurenet/pipeline/config.hpp"
#include "seizurenet/segment/dataset.hpp"
#include "seizurenet/train/trainer.hpp"

namespace seizurenet::pipeline {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitUnexpected = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitInsufficientSeizures = 4,
  kExitVerificationFailed = 5,
  kExitIo = 6,
};

int exit_code_for(const std::exception& e);

struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;  // replaces the data, init and train seeds
};

void apply_overrides(PipelineConfig& config, const Overrides& overrides);

struct FileDigest {
  std::string path;
  std::string sha256;
};

// Written next to a command's outputs as run_manifest_<command>.json.
struct RunManifest {
  std::string command;
  std::string tool_version;
  std::string config_sha256;
  Seeds seeds;
  std::string started_utc;
  std::string finished_utc;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
};

Json to_json(const RunManifest& manifest);
std::string tool_version();

// Loads the subject timeline the config points at: the synthetic generator
// in memory, or the EDF files named by a CHB-MIT summary. Errors carry the
// offending file name.
ingest::Timeline load_timeline(const PipelineConfig& config, std::vector<std::string>* inputs = nullptr);

// Fresh featurization, bypassing any cache.
segment::Dataset build_dataset_for(const PipelineConfig& config);

struct DatasetPaths {
  std::filesystem::path manifest;
  std::filesystem::path data;
  std::filesystem::path key;  // digest of everything the cache depends on
};
DatasetPaths dataset_paths(const PipelineConfig& config);

// Reuses out/dataset.* when its key matches the config, otherwise rebuilds
// and rewrites the cache.
segment::Dataset load_or_build_dataset(const PipelineConfig& config, std::ostream& log);

struct MakeSynthOutput {
  std::vector<std::filesystem::path> edf_files;
  std::filesystem::path summary;
};
MakeSynthOutput cmd_make_synth(const PipelineConfig& config, std::ostream& log);

segment::Dataset cmd_preprocess(const PipelineConfig& config, std::ostream& log);

train::FoldResult cmd_train(const PipelineConfig& config, std::int64_t fold_key, std::ostream& log);

train::CrossValidation cmd_crossval(const PipelineConfig& config, std::ostream& log);

// Returns the report; the caller turns a failure into kExitVerificationFailed.
net::GradcheckReport cmd_gradcheck(const net::GradcheckOptions& options, std::ostream& log);

std::string folds_csv(std::span<const train::FoldReport> folds);
std::vector<train::FoldReport> parse_folds_csv(const std::string& text, const std::string& source);

struct ReportRow {
  std::string run;
  std::size_t n_folds = 0;
  train::Aggregate stats;
};

// One row per run directory (each holding folds.csv), sorted by run name.
// Writes report.csv and report.json under out_dir when given.
std::vector<ReportRow> cmd_report(const std::vector<std::string>& run_dirs,
                                  const std::optional<std::string>& out_dir, std::ostream& log);

}  // namespace seizurenet::pipeline
