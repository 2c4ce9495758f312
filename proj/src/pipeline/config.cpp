#include "seizurenet/pipeline/config.hpp"

#include <cmath>

#include <fmt/format.h>

#include "seizurenet/errors.hpp"
#include "seizurenet/io.hpp"
#include "seizurenet/json_util.hpp"

namespace seizurenet::pipeline {

namespace {

void reject_nested_seed(const Json& section, const std::string& path) {
  if (section.is_object() && section.contains("seed")) {
    throw ConfigError(fmt::format("'{}.seed' is not allowed; set seeds in the 'seeds' section", path));
  }
}

}  // namespace

const std::vector<std::string>& default_montage() {
  static const std::vector<std::string> montage = {
      "FP1-F7", "F7-T7", "T7-P7", "P7-O1", "FP1-F3", "F3-C3", "C3-P3", "P3-O1", "FP2-F4",
      "F4-C4",  "C4-P4", "P4-O2", "FP2-F8", "F8-T8", "T8-P8", "P8-O2", "FZ-CZ", "CZ-PZ"};
  return montage;
}

segment::TimingPolicy PipelineConfig::resolved_timing() const {
  if (timing) return *timing;
  if (data.kind == SourceKind::Synthetic) return segment::TimingPolicy{}.compressed(data.synthetic.seconds_per_hour);
  return {};
}

segment::StftConfig PipelineConfig::resolved_stft(double fs) const {
  if (stft) return *stft;
  const auto n = static_cast<std::size_t>(std::llround(fs));
  segment::StftConfig c;
  c.n_fft = n;
  c.hop = std::max<std::size_t>(1, n / 2);
  c.bin_first = 1;
  c.bin_last = n / 2;
  return c;
}

std::vector<std::string> PipelineConfig::channels() const {
  if (data.kind == SourceKind::Synthetic) {
    if (montage.size() < data.synthetic.n_channels) {
      throw ConfigError(fmt::format("montage lists {} channels, synthetic data needs {}", montage.size(),
                                    data.synthetic.n_channels));
    }
    return {montage.begin(), montage.begin() + static_cast<long>(data.synthetic.n_channels)};
  }
  return montage;
}

net::ModelConfig PipelineConfig::resolved_model(const segment::SampleShape& shape) const {
  net::ModelConfig m = model;
  const net::Dim3 from_data{shape[0], shape[1], shape[2]};
  if (model_input && !(*model_input == from_data)) {
    throw ConfigError(fmt::format("model.input {} does not match the dataset sample shape {}",
                                  net::to_string(*model_input), net::to_string(from_data)));
  }
  m.input = from_data;
  m.seed = seeds.init;
  net::validate(m);
  return m;
}

train::TrainConfig PipelineConfig::resolved_train() const {
  train::TrainConfig t = train;
  t.seed = seeds.train;
  return t;
}

ingest::SyntheticSpec PipelineConfig::resolved_synthetic() const {
  ingest::SyntheticSpec s = data.synthetic;
  s.seed = seeds.data;
  return s;
}

PipelineConfig parse_config(const Json& j) {
  PipelineConfig c;
  StrictObject root(j, "");

  if (root.has("data")) {
    StrictObject d(root.child("data"), "config.data");
    std::string source = "synthetic";
    d.optional("source", source);
    if (source == "synthetic") {
      c.data.kind = SourceKind::Synthetic;
      if (d.has("synthetic")) {
        reject_nested_seed(d.child("synthetic"), "config.data.synthetic");
        c.data.synthetic = synthetic_spec_from_json(d.child("synthetic"), "config.data.synthetic");
      }
    } else if (source == "edf") {
      c.data.kind = SourceKind::Edf;
      d.required("edf_dir", c.data.edf_dir);
      d.required("summary", c.data.summary_path);
    } else {
      throw ConfigError("config.data.source must be \"synthetic\" or \"edf\"");
    }
    d.finish();
  }
  root.optional("montage", c.montage);
  if (c.montage.empty()) throw ConfigError("config.montage must list at least one channel");
  if (root.has("timing")) c.timing = timing_policy_from_json(root.child("timing"), "config.timing");
  if (root.has("stft")) c.stft = stft_config_from_json(root.child("stft"), "config.stft");
  if (root.has("model")) {
    const auto& m = root.child("model");
    reject_nested_seed(m, "config.model");
    c.model = model_config_from_json(m, "config.model");
    if (m.contains("input")) c.model_input = c.model.input;
  }
  if (root.has("train")) {
    reject_nested_seed(root.child("train"), "config.train");
    c.train = train_config_from_json(root.child("train"), "config.train");
  }
  if (root.has("seeds")) {
    StrictObject s(root.child("seeds"), "config.seeds");
    s.optional("data", c.seeds.data);
    s.optional("init", c.seeds.init);
    s.optional("train", c.seeds.train);
    s.finish();
  }
  root.optional("output_dir", c.output_dir);
  root.finish();

  if (c.data.kind == SourceKind::Synthetic) ingest::validate(c.resolved_synthetic());
  (void)c.channels();
  return c;
}

PipelineConfig load_config(const std::string& path) {
  Json j;
  try {
    j = Json::parse(io::read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw ConfigError(fmt::format("'{}' is not valid JSON: {}", path, e.what()));
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(j);
}

Json to_json(const PipelineConfig& c) {
  Json data;
  if (c.data.kind == SourceKind::Synthetic) {
    Json synth = seizurenet::to_json(c.data.synthetic);
    synth.erase("seed");
    data = Json{{"source", "synthetic"}, {"synthetic", synth}};
  } else {
    data = Json{{"source", "edf"}, {"edf_dir", c.data.edf_dir}, {"summary", c.data.summary_path}};
  }
  Json model = seizurenet::to_json(c.model);
  model.erase("seed");
  if (c.model_input) {
    model["input"] = Json::array({c.model_input->c, c.model_input->f, c.model_input->t});
  } else {
    model.erase("input");
  }
  Json train = seizurenet::to_json(c.train);
  train.erase("seed");

  Json out{{"data", data}, {"montage", c.montage}};
  if (c.timing) out["timing"] = seizurenet::to_json(*c.timing);
  if (c.stft) out["stft"] = seizurenet::to_json(*c.stft);
  out["model"] = model;
  out["train"] = train;
  out["seeds"] = Json{{"data", c.seeds.data}, {"init", c.seeds.init}, {"train", c.seeds.train}};
  out["output_dir"] = c.output_dir;
  return out;
}

PipelineConfig synthetic_default_config() {
  PipelineConfig c;
  c.data.kind = SourceKind::Synthetic;
  c.model.n_filters = 8;
  c.train.max_epochs = 15;
  c.train.batch_size = 8;
  return c;
}

std::string config_digest(const PipelineConfig& c) { return io::sha256_hex(to_json(c).dump()); }

std::string data_digest(const PipelineConfig& c) {
  Json j = to_json(c);
  Json d{{"data", j["data"]}, {"montage", j["montage"]}, {"seed", c.seeds.data}};
  d["timing"] = seizurenet::to_json(c.resolved_timing());
  if (c.stft) d["stft"] = seizurenet::to_json(*c.stft);
  return io::sha256_hex(d.dump());
}

}  // namespace seizurenet::pipeline
