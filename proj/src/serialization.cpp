#include "seizurenet/serialization.hpp"

#include <fmt/format.h>

#include "seizurenet/json_util.hpp"

namespace seizurenet {

namespace {

Json dim_json(const net::Dim3& d) { return Json::array({d.c, d.f, d.t}); }

net::Dim3 dim_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3 ||
      !std::all_of(j.begin(), j.end(), [](const Json& v) { return v.is_number_unsigned() && v.get<std::size_t>() > 0; })) {
    throw ConfigError(path + " must be an array of three positive integers");
  }
  return {j[0].get<std::size_t>(), j[1].get<std::size_t>(), j[2].get<std::size_t>()};
}

template <std::size_t N>
std::array<net::Dim3, N> dims_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != N) throw ConfigError(fmt::format("{} must list {} triples", path, N));
  std::array<net::Dim3, N> out{};
  for (std::size_t i = 0; i < N; ++i) out[i] = dim_from_json(j[i], fmt::format("{}[{}]", path, i));
  return out;
}

}  // namespace

Json to_json(const ingest::SyntheticSpec& s) {
  return Json{{"n_channels", s.n_channels},
              {"fs", s.fs},
              {"n_seizures", s.n_seizures},
              {"seconds_per_hour", s.seconds_per_hour},
              {"inter_seizure_gap", s.inter_seizure_gap},
              {"seizure_duration", s.seizure_duration},
              {"preictal_signature", {{"center_hz", s.preictal_signature.center_hz}, {"gain", s.preictal_signature.gain}}},
              {"noise_amplitude", s.noise_amplitude},
              {"seed", s.seed},
              {"file_duration", s.file_duration}};
}

Json to_json(const segment::TimingPolicy& p) {
  return Json{{"sop", p.sop},
              {"sph", p.sph},
              {"interictal_gap", p.interictal_gap},
              {"seizure_free_T", p.seizure_free_T},
              {"window_len", p.window_len},
              {"overlap", p.overlap}};
}

Json to_json(const segment::StftConfig& c) {
  return Json{{"n_fft", c.n_fft},
              {"hop", c.hop},
              {"window", "hann"},
              {"bins_kept", Json::array({c.bin_first, c.bin_last})},
              {"magnitude_transform", c.magnitude_transform == segment::MagnitudeTransform::Log1p ? "log1p" : "linear"}};
}

Json to_json(const net::ModelConfig& c) {
  Json branches = Json::array();
  for (const auto& b : c.branches) {
    Json kernels = Json::array(), pools = Json::array();
    for (const auto& k : b.kernels) kernels.push_back(dim_json(k));
    for (const auto& p : b.pools) pools.push_back(dim_json(p));
    branches.push_back(Json{{"dilation", dim_json(b.dilation)}, {"kernels", kernels}, {"pools", pools}});
  }
  return Json{{"input", dim_json(c.input)}, {"n_filters", c.n_filters}, {"seed", c.seed}, {"branches", branches}};
}

Json to_json(const train::TrainConfig& c) {
  return Json{{"optimizer", "adam"},
              {"lr", c.adam.lr},
              {"beta1", c.adam.beta1},
              {"beta2", c.adam.beta2},
              {"eps", c.adam.eps},
              {"batch_size", c.batch_size},
              {"max_epochs", c.max_epochs},
              {"seed", c.seed},
              {"decision_threshold", c.decision_threshold},
              {"balance", "undersample_interictal"}};
}

Json to_json(const train::FoldReport& r) {
  return Json{{"fold_key", r.fold_key},
              {"tp", r.counts.tp},
              {"fn", r.counts.fn},
              {"tn", r.counts.tn},
              {"fp", r.counts.fp},
              {"acc", r.metrics.acc},
              {"tpr", r.metrics.tpr},
              {"tnr", r.metrics.tnr},
              {"epochs_run", r.epochs_run},
              {"final_train_loss", r.final_train_loss},
              {"n_train", r.n_train},
              {"n_test", r.n_test}};
}

Json to_json(const train::BoxStats& b) {
  return Json{{"mean", b.mean}, {"min", b.min}, {"q1", b.q1}, {"median", b.median}, {"q3", b.q3}, {"max", b.max}};
}

Json to_json(const train::Aggregate& a) {
  return Json{{"acc", to_json(a.acc)}, {"tpr", to_json(a.tpr)}, {"tnr", to_json(a.tnr)}};
}

ingest::SyntheticSpec synthetic_spec_from_json(const Json& j, const std::string& path) {
  ingest::SyntheticSpec s;
  StrictObject o(j, path);
  o.optional("n_channels", s.n_channels);
  o.optional("fs", s.fs);
  o.optional("n_seizures", s.n_seizures);
  o.optional("seconds_per_hour", s.seconds_per_hour);
  o.optional("inter_seizure_gap", s.inter_seizure_gap);
  o.optional("seizure_duration", s.seizure_duration);
  if (o.has("preictal_signature")) {
    StrictObject sig(o.child("preictal_signature"), o.where("preictal_signature"));
    sig.optional("center_hz", s.preictal_signature.center_hz);
    sig.optional("gain", s.preictal_signature.gain);
    sig.finish();
  }
  o.optional("noise_amplitude", s.noise_amplitude);
  o.optional("seed", s.seed);
  o.optional("file_duration", s.file_duration);
  o.finish();
  return s;
}

segment::TimingPolicy timing_policy_from_json(const Json& j, const std::string& path) {
  segment::TimingPolicy p;
  StrictObject o(j, path);
  o.optional("sop", p.sop);
  o.optional("sph", p.sph);
  o.optional("interictal_gap", p.interictal_gap);
  o.optional("seizure_free_T", p.seizure_free_T);
  o.optional("window_len", p.window_len);
  o.optional("overlap", p.overlap);
  o.finish();
  segment::validate(p);
  return p;
}

segment::StftConfig stft_config_from_json(const Json& j, const std::string& path) {
  segment::StftConfig c;
  StrictObject o(j, path);
  o.optional("n_fft", c.n_fft);
  o.optional("hop", c.hop);
  std::string window = "hann";
  o.optional("window", window);
  if (window != "hann") throw ConfigError(o.where("window") + " must be \"hann\"");
  if (o.has("bins_kept")) {
    std::array<std::size_t, 2> bins{};
    o.optional("bins_kept", bins);
    c.bin_first = bins[0];
    c.bin_last = bins[1];
  }
  std::string transform = "log1p";
  o.optional("magnitude_transform", transform);
  if (transform == "log1p") {
    c.magnitude_transform = segment::MagnitudeTransform::Log1p;
  } else if (transform == "linear") {
    c.magnitude_transform = segment::MagnitudeTransform::Linear;
  } else {
    throw ConfigError(o.where("magnitude_transform") + " must be \"log1p\" or \"linear\"");
  }
  o.finish();
  segment::validate(c);
  return c;
}

net::ModelConfig model_config_from_json(const Json& j, const std::string& path) {
  net::ModelConfig c;
  StrictObject o(j, path);
  if (o.has("input")) c.input = dim_from_json(o.child("input"), o.where("input"));
  o.optional("n_filters", c.n_filters);
  o.optional("seed", c.seed);
  if (o.has("branches")) {
    const auto& arr = o.child("branches");
    if (!arr.is_array() || arr.size() != net::kBranches) {
      throw ConfigError(fmt::format("{} must list {} branches", o.where("branches"), net::kBranches));
    }
    for (std::size_t b = 0; b < net::kBranches; ++b) {
      const std::string bp = fmt::format("{}[{}]", o.where("branches"), b);
      StrictObject bo(arr[b], bp);
      if (bo.has("dilation")) c.branches[b].dilation = dim_from_json(bo.child("dilation"), bp + ".dilation");
      if (bo.has("kernels")) c.branches[b].kernels = dims_from_json<net::kLayers>(bo.child("kernels"), bp + ".kernels");
      if (bo.has("pools")) c.branches[b].pools = dims_from_json<net::kLayers>(bo.child("pools"), bp + ".pools");
      bo.finish();
    }
  }
  o.finish();
  return c;
}

train::TrainConfig train_config_from_json(const Json& j, const std::string& path) {
  train::TrainConfig c;
  StrictObject o(j, path);
  std::string optimizer = "adam";
  o.optional("optimizer", optimizer);
  if (optimizer != "adam") throw ConfigError(o.where("optimizer") + " must be \"adam\"");
  o.optional("lr", c.adam.lr);
  o.optional("beta1", c.adam.beta1);
  o.optional("beta2", c.adam.beta2);
  o.optional("eps", c.adam.eps);
  o.optional("batch_size", c.batch_size);
  o.optional("max_epochs", c.max_epochs);
  o.optional("seed", c.seed);
  o.optional("decision_threshold", c.decision_threshold);
  std::string balance = "undersample_interictal";
  o.optional("balance", balance);
  if (balance != "undersample_interictal") throw ConfigError(o.where("balance") + " must be \"undersample_interictal\"");
  o.finish();
  train::validate(c);
  return c;
}

train::FoldReport fold_report_from_json(const Json& j, const std::string& path) {
  train::FoldReport r;
  StrictObject o(j, path);
  o.required("fold_key", r.fold_key);
  o.required("tp", r.counts.tp);
  o.required("fn", r.counts.fn);
  o.required("tn", r.counts.tn);
  o.required("fp", r.counts.fp);
  o.required("acc", r.metrics.acc);
  o.required("tpr", r.metrics.tpr);
  o.required("tnr", r.metrics.tnr);
  o.optional("epochs_run", r.epochs_run);
  o.optional("final_train_loss", r.final_train_loss);
  o.optional("n_train", r.n_train);
  o.optional("n_test", r.n_test);
  o.finish();
  return r;
}

}  // namespace seizurenet
