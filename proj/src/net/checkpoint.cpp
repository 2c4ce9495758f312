#include "seizurenet/net/checkpoint.hpp"

#include <bit>
#include <cstring>

#include <fmt/format.h>

#include "seizurenet/errors.hpp"
#include "seizurenet/ingest/edf.hpp"
#include "seizurenet/io.hpp"
#include "seizurenet/json_util.hpp"
#include "seizurenet/serialization.hpp"

namespace seizurenet::net {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {
constexpr int kCheckpointFormat = 1;
}

void save_checkpoint(const Checkpoint& ck, const std::string& manifest_path, const std::string& params_path) {
  if (!(ck.params.layout == ParamLayout(ck.config))) throw ShapeMismatch("checkpoint parameters do not match its config");
  const Json manifest{{"format", kCheckpointFormat},
                      {"config", to_json(ck.config)},
                      {"seed", ck.config.seed},
                      {"epoch", ck.epoch},
                      {"metrics", ck.metrics},
                      {"param_count", ck.params.values.size()},
                      {"param_order", "branch-major, layer-major, weights then bias; dense weights [2 x features] "
                                      "then dense bias last"},
                      {"dtype", "float64-le"},
                      {"normalization", {{"mean", ck.norm_mean}, {"std", ck.norm_std}}}};
  std::vector<std::uint8_t> bytes(ck.params.values.size() * sizeof(double));
  std::memcpy(bytes.data(), ck.params.values.data(), bytes.size());
  io::write_file_atomic(params_path, bytes);
  io::write_file_atomic(manifest_path, manifest.dump(2) + "\n");
}

Checkpoint load_checkpoint(const std::string& manifest_path, const std::string& params_path) {
  Json m;
  try {
    m = Json::parse(io::read_text_file(manifest_path));
  } catch (const Json::parse_error& e) {
    throw DataError(fmt::format("'{}' is not valid JSON: {}", manifest_path, e.what()));
  }
  Checkpoint ck;
  StrictObject o(m, "checkpoint");
  int format = 0;
  o.required("format", format);
  if (format != kCheckpointFormat) throw DataError(fmt::format("unsupported checkpoint format {}", format));
  ck.config = model_config_from_json(o.child("config"), "checkpoint.config");
  std::uint64_t seed = 0;
  o.optional("seed", seed);
  o.optional("epoch", ck.epoch);
  if (o.has("metrics")) ck.metrics = o.child("metrics");
  std::size_t count = 0;
  o.required("param_count", count);
  std::string order, dtype;
  o.optional("param_order", order);
  o.required("dtype", dtype);
  if (dtype != "float64-le") throw DataError(fmt::format("unsupported dtype '{}'", dtype));
  if (o.has("normalization")) {
    StrictObject norm(o.child("normalization"), "checkpoint.normalization");
    norm.optional("mean", ck.norm_mean);
    norm.optional("std", ck.norm_std);
    norm.finish();
  }
  o.finish();

  ck.params = ModelParams(ck.config);
  if (count != ck.params.values.size()) {
    throw StaleCache(fmt::format("checkpoint lists {} parameters, config needs {}", count, ck.params.values.size()));
  }
  const auto bytes = ingest::read_file_bytes(params_path);
  if (bytes.size() != count * sizeof(double)) {
    throw TruncatedData(fmt::format("'{}' holds {} bytes, expected {}", params_path, bytes.size(), count * sizeof(double)));
  }
  std::memcpy(ck.params.values.data(), bytes.data(), bytes.size());
  return ck;
}

}  // namespace seizurenet::net
