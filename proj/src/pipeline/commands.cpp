#include "seizurenet/pipeline/commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <sstream>

#include <fmt/format.h>

#include "seizurenet/errors.hpp"
#include "seizurenet/ingest/edf.hpp"
#include "seizurenet/ingest/summary.hpp"
#include "seizurenet/ingest/synthetic.hpp"
#include "seizurenet/io.hpp"
#include "seizurenet/json_util.hpp"
#include "seizurenet/net/checkpoint.hpp"

#ifndef SEIZURENET_VERSION
#define SEIZURENET_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace seizurenet::pipeline {

namespace {

constexpr std::string_view kCsvHeader = "fold_key,acc,tpr,tnr,epochs,loss";

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Collects digests and writes run_manifest_<command>.json on finish().
class ManifestWriter {
 public:
  ManifestWriter(std::string command, const PipelineConfig* config, fs::path dir) : dir_(std::move(dir)) {
    m_.command = std::move(command);
    m_.tool_version = tool_version();
    if (config) {
      m_.config_sha256 = config_digest(*config);
      m_.seeds = config->seeds;
    }
    m_.started_utc = utc_now();
  }

  void input(const fs::path& p) { m_.inputs.push_back({p.string(), io::sha256_file(p.string())}); }
  void output(const fs::path& p) { m_.outputs.push_back({p.string(), io::sha256_file(p.string())}); }

  void finish() {
    m_.finished_utc = utc_now();
    const auto path = dir_ / fmt::format("run_manifest_{}.json", m_.command);
    io::write_file_atomic(path.string(), to_json(m_).dump(2) + "\n");
  }

 private:
  fs::path dir_;
  RunManifest m_;
};

// Re-raises the current ingest/segment error with the file it came from.
[[noreturn]] void rethrow_with_file(const std::string& file) {
  try {
    throw;
  } catch (const ParseError& e) {
    throw ParseError(e.line(), fmt::format("{}: {}", file, e.detail()));
  } catch (const IoError& e) {
    throw IoError(fmt::format("{}: {}", file, e.what()));
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", file, e.what()));
  }
}

std::string format_metric(double v) { return fmt::format("{:.17g}", v); }

void log_dataset(const segment::Dataset& ds, std::ostream& log) {
  const auto& s = ds.summary;
  log << fmt::format("seizures: {}  leading: {}  folds: {}\n", s.n_seizures, s.leading.size(), ds.fold_keys().size());
  if (!s.empty_preictal.empty()) {
    log << fmt::format("leading seizures without recorded preictal data: {}\n", fmt::join(s.empty_preictal, ","));
  }
  log << fmt::format("preictal windows: {} ({:.0f} s labeled)\n", s.n_preictal, s.preictal_seconds);
  log << fmt::format("interictal windows: {} ({:.0f} s labeled)\n", s.n_interictal, s.interictal_seconds);
  for (const auto& [k, n] : s.preictal_per_fold) log << fmt::format("  fold {}: {} preictal windows\n", k, n);
  log << fmt::format("sample shape: ({},{},{})\n", ds.shape[0], ds.shape[1], ds.shape[2]);
}

std::string cache_key(const PipelineConfig& config) {
  Json key{{"config", data_digest(config)}};
  if (config.data.kind == SourceKind::Edf) {
    // Source files are hashed so edits to them invalidate the cache.
    std::string summary_text;
    std::vector<ingest::SummaryEntry> entries;
    try {
      summary_text = io::read_text_file(config.data.summary_path);
      entries = ingest::parse_chbmit_summary(summary_text);
    } catch (const Error&) {
      rethrow_with_file(config.data.summary_path);
    }
    Json files = Json::array();
    files.push_back(io::sha256_hex(summary_text));
    for (const auto& e : entries) {
      files.push_back(io::sha256_file((fs::path(config.data.edf_dir) / e.file_name).string()));
    }
    key["files"] = files;
  }
  return io::sha256_hex(key.dump());
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const InsufficientSeizures*>(&e)) return kExitInsufficientSeizures;
  if (dynamic_cast<const VerificationError*>(&e)) return kExitVerificationFailed;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const DataError*>(&e)) return kExitData;
  return kExitUnexpected;
}

void apply_overrides(PipelineConfig& config, const Overrides& o) {
  if (o.out_dir) config.output_dir = *o.out_dir;
  if (o.seed) config.seeds = {*o.seed, *o.seed, *o.seed};
}

std::string tool_version() { return SEIZURENET_VERSION; }

Json to_json(const RunManifest& m) {
  auto digests = [](const std::vector<FileDigest>& v) {
    Json a = Json::array();
    for (const auto& d : v) a.push_back(Json{{"path", d.path}, {"sha256", d.sha256}});
    return a;
  };
  return Json{{"command", m.command},
              {"tool_version", m.tool_version},
              {"config_sha256", m.config_sha256},
              {"seeds", {{"data", m.seeds.data}, {"init", m.seeds.init}, {"train", m.seeds.train}}},
              {"started_utc", m.started_utc},
              {"finished_utc", m.finished_utc},
              {"inputs", digests(m.inputs)},
              {"outputs", digests(m.outputs)}};
}

ingest::Timeline load_timeline(const PipelineConfig& config, std::vector<std::string>* inputs) {
  const auto channels = config.channels();
  if (config.data.kind == SourceKind::Synthetic) {
    auto [recording, seizures] = ingest::generate_synthetic_recording(config.resolved_synthetic(), channels);
    ingest::Timeline t;
    t.segments.push_back({"synthetic", 0.0, std::move(recording)});
    t.seizures = std::move(seizures);
    return t;
  }

  const std::string& summary_path = config.data.summary_path;
  std::vector<ingest::SummaryEntry> entries;
  try {
    entries = ingest::parse_chbmit_summary(io::read_text_file(summary_path));
  } catch (const Error&) {
    rethrow_with_file(summary_path);
  }
  if (inputs) inputs->push_back(summary_path);
  std::vector<ingest::Recording> recordings;
  for (const auto& e : entries) {
    const auto path = (fs::path(config.data.edf_dir) / e.file_name).string();
    try {
      recordings.push_back(ingest::read_edf_signals(ingest::read_file_bytes(path), channels));
    } catch (const Error&) {
      rethrow_with_file(path);
    }
    if (inputs) inputs->push_back(path);
  }
  return ingest::assemble_timeline(entries, std::move(recordings));
}

segment::Dataset build_dataset_for(const PipelineConfig& config) {
  const auto timeline = load_timeline(config);
  const double fs = timeline.segments.empty() ? 0.0 : timeline.segments.front().recording.fs();
  return segment::build_dataset(timeline, config.resolved_timing(), config.resolved_stft(fs));
}

DatasetPaths dataset_paths(const PipelineConfig& config) {
  const fs::path out(config.output_dir);
  return {out / "dataset.json", out / "dataset.f32", out / "dataset.key"};
}

segment::Dataset load_or_build_dataset(const PipelineConfig& config, std::ostream& log) {
  const auto paths = dataset_paths(config);
  const auto key = cache_key(config);
  if (fs::exists(paths.key) && fs::exists(paths.manifest) && fs::exists(paths.data)) {
    std::string stored = io::read_text_file(paths.key.string());
    while (!stored.empty() && (stored.back() == '\n' || stored.back() == '\r')) stored.pop_back();
    if (stored == key) {
      log << fmt::format("using cached dataset {}\n", paths.manifest.string());
      return segment::load_dataset(paths.manifest.string(), paths.data.string());
    }
  }
  return cmd_preprocess(config, log);
}

MakeSynthOutput cmd_make_synth(const PipelineConfig& config, std::ostream& log) {
  if (config.data.kind != SourceKind::Synthetic) throw ConfigError("make-synth needs data.source = \"synthetic\"");
  const fs::path dir = fs::path(config.output_dir) / "synth";
  ManifestWriter manifest("make-synth", &config, config.output_dir);

  const auto spec = config.resolved_synthetic();
  const auto [recording, seizures] = ingest::generate_synthetic_recording(spec, config.channels());
  const auto [entries, files] = ingest::split_into_files(recording, seizures, spec.file_duration, "synth");

  MakeSynthOutput out;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const auto path = dir / entries[i].file_name;
    io::write_file_atomic(path.string(), ingest::write_edf(ingest::make_edf_header(files[i]), files[i]));
    out.edf_files.push_back(path);
    manifest.output(path);
  }
  out.summary = dir / "synth-summary.txt";
  io::write_file_atomic(out.summary.string(), ingest::format_chbmit_summary(entries, spec.fs));
  manifest.output(out.summary);
  manifest.finish();

  log << fmt::format("wrote {} EDF files and {} ({} seizures)\n", out.edf_files.size(), out.summary.string(),
                     seizures.size());
  return out;
}

segment::Dataset cmd_preprocess(const PipelineConfig& config, std::ostream& log) {
  ManifestWriter manifest("preprocess", &config, config.output_dir);
  std::vector<std::string> inputs;
  const auto timeline = load_timeline(config, &inputs);
  const double fs = timeline.segments.empty() ? 0.0 : timeline.segments.front().recording.fs();
  auto ds = segment::build_dataset(timeline, config.resolved_timing(), config.resolved_stft(fs));

  const auto paths = dataset_paths(config);
  segment::save_dataset(ds, paths.manifest.string(), paths.data.string());
  io::write_file_atomic(paths.key.string(), cache_key(config) + "\n");
  for (const auto& p : inputs) manifest.input(p);
  manifest.output(paths.manifest);
  manifest.output(paths.data);
  manifest.finish();

  log_dataset(ds, log);
  log << fmt::format("wrote {}\n", paths.manifest.string());
  return ds;
}

train::FoldResult cmd_train(const PipelineConfig& config, std::int64_t fold_key, std::ostream& log) {
  const auto ds = load_or_build_dataset(config, log);
  const auto keys = ds.fold_keys();
  if (std::find(keys.begin(), keys.end(), fold_key) == keys.end()) {
    throw ConfigError(fmt::format("fold {} is not a leading seizure with preictal data (folds: {})", fold_key,
                                  fmt::join(keys, ",")));
  }
  const auto model = config.resolved_model(ds.shape);
  ManifestWriter manifest("train", &config, config.output_dir);
  const auto paths = dataset_paths(config);
  manifest.input(paths.manifest);
  manifest.input(paths.data);

  auto result = train::train_fold(ds, fold_key, model, config.resolved_train());
  const fs::path dir = fs::path(config.output_dir) / fmt::format("fold_{}", fold_key);
  net::Checkpoint ck{model, result.params, result.report.epochs_run, seizurenet::to_json(result.report),
                     result.normalizer.mean(), result.normalizer.stddev()};
  net::save_checkpoint(ck, (dir / "checkpoint.json").string(), (dir / "params.f64").string());
  io::write_file_atomic((dir / "report.json").string(), seizurenet::to_json(result.report).dump(2) + "\n");
  manifest.output(dir / "checkpoint.json");
  manifest.output(dir / "params.f64");
  manifest.output(dir / "report.json");
  manifest.finish();

  const auto& m = result.report.metrics;
  log << fmt::format("fold {}: acc {:.3f} tpr {:.3f} tnr {:.3f} ({} test samples, {} epochs)\n", fold_key, m.acc,
                     m.tpr, m.tnr, result.report.n_test, result.report.epochs_run);
  return result;
}

train::CrossValidation cmd_crossval(const PipelineConfig& config, std::ostream& log) {
  const auto ds = load_or_build_dataset(config, log);
  const auto keys = ds.fold_keys();
  if (keys.size() < 3) {
    throw InsufficientSeizures(
        fmt::format("leave-one-out needs at least 3 leading seizures, dataset has {}", keys.size()));
  }
  const auto model = config.resolved_model(ds.shape);
  const auto tc = config.resolved_train();
  ManifestWriter manifest("crossval", &config, config.output_dir);
  const auto paths = dataset_paths(config);
  manifest.input(paths.manifest);
  manifest.input(paths.data);

  train::CrossValidation cv;
  for (const auto k : keys) {
    cv.folds.push_back(train::train_fold(ds, k, model, tc).report);
    const auto& m = cv.folds.back().metrics;
    log << fmt::format("fold {}: acc {:.3f} tpr {:.3f} tnr {:.3f}\n", k, m.acc, m.tpr, m.tnr);
  }
  cv.summary = train::aggregate(cv.folds);

  const fs::path out(config.output_dir);
  Json folds = Json::array();
  for (const auto& f : cv.folds) folds.push_back(seizurenet::to_json(f));
  io::write_file_atomic((out / "folds.csv").string(), folds_csv(cv.folds));
  io::write_file_atomic((out / "folds.json").string(), folds.dump(2) + "\n");
  Json agg = seizurenet::to_json(cv.summary);
  agg["n_folds"] = cv.folds.size();
  io::write_file_atomic((out / "aggregate.json").string(), agg.dump(2) + "\n");
  for (const char* name : {"folds.csv", "folds.json", "aggregate.json"}) manifest.output(out / name);
  manifest.finish();

  log << fmt::format("{:<10} {:>6} {:>6} {:>6}\n", "model", "ACC", "TPR", "TNR");
  log << fmt::format("{:<10} {:>6.3f} {:>6.3f} {:>6.3f}\n", "ms-d3dcnn", cv.summary.acc.mean, cv.summary.tpr.mean,
                     cv.summary.tnr.mean);
  return cv;
}

net::GradcheckReport cmd_gradcheck(const net::GradcheckOptions& options, std::ostream& log) {
  const auto report = net::run_gradcheck(options);
  log << fmt::format("{:<6} {:>12} {:>8}  {}\n", "layer", "worst_rel", "checked", "status");
  for (const auto& r : report.rows) {
    log << fmt::format("{:<6} {:>12.3e} {:>8}  {}\n", r.layer, r.worst_error, r.checked, r.passed ? "ok" : "FAIL");
  }
  log << (report.passed ? "gradcheck passed\n" : fmt::format("gradcheck FAILED (tolerance {:g})\n", options.tolerance));
  return report;
}

std::string folds_csv(std::span<const train::FoldReport> folds) {
  std::string s(kCsvHeader);
  s += '\n';
  for (const auto& f : folds) {
    s += fmt::format("{},{},{},{},{},{}\n", f.fold_key, format_metric(f.metrics.acc), format_metric(f.metrics.tpr),
                     format_metric(f.metrics.tnr), f.epochs_run, format_metric(f.final_train_loss));
  }
  return s;
}

std::vector<train::FoldReport> parse_folds_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) { throw ParseError(line_no, fmt::format("{}: {}", source, what)); };
  if (!std::getline(in, line)) fail("empty file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) fail(fmt::format("expected header '{}'", kCsvHeader));

  std::vector<train::FoldReport> folds;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
    if (cells.size() != 6) fail(fmt::format("expected 6 fields, found {}", cells.size()));
    train::FoldReport f;
    try {
      std::size_t used = 0;
      auto num = [&](const std::string& c) {
        const double v = std::stod(c, &used);
        if (used != c.size()) throw std::invalid_argument(c);
        return v;
      };
      f.fold_key = std::stoll(cells[0], &used);
      if (used != cells[0].size()) throw std::invalid_argument(cells[0]);
      f.metrics = {num(cells[1]), num(cells[2]), num(cells[3])};
      f.epochs_run = std::stoull(cells[4], &used);
      if (used != cells[4].size()) throw std::invalid_argument(cells[4]);
      f.final_train_loss = num(cells[5]);
    } catch (const std::logic_error&) {
      fail(fmt::format("malformed row '{}'", line));
    }
    folds.push_back(f);
  }
  return folds;
}

std::vector<ReportRow> cmd_report(const std::vector<std::string>& run_dirs, const std::optional<std::string>& out_dir,
                                  std::ostream& log) {
  if (run_dirs.empty()) throw ConfigError("report needs at least one run directory");
  std::vector<ReportRow> rows;
  std::vector<fs::path> inputs;
  for (const auto& dir : run_dirs) {
    const fs::path csv = fs::path(dir) / "folds.csv";
    if (!fs::is_regular_file(csv)) throw MissingRun(fmt::format("'{}' has no folds.csv", dir));
    auto folds = parse_folds_csv(io::read_text_file(csv.string()), csv.string());
    if (folds.empty()) throw MissingRun(fmt::format("'{}' lists no folds", csv.string()));
    auto name = fs::path(dir).lexically_normal().filename();
    if (name.empty()) name = fs::path(dir).lexically_normal().parent_path().filename();
    rows.push_back({name.string(), folds.size(), train::aggregate(folds)});
    inputs.push_back(csv);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.run < b.run; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].run == rows[i - 1].run) throw ConfigError(fmt::format("run name '{}' given twice", rows[i].run));
  }

  log << fmt::format("{:<16} {:>5}  {:<6} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}\n", "run", "folds", "metric", "min",
                     "q1", "median", "q3", "max", "mean");
  for (const auto& r : rows) {
    const std::pair<const char*, const train::BoxStats*> metrics[] = {
        {"acc", &r.stats.acc}, {"tpr", &r.stats.tpr}, {"tnr", &r.stats.tnr}};
    for (const auto& [name, b] : metrics) {
      log << fmt::format("{:<16} {:>5}  {:<6} {:>7.4f} {:>7.4f} {:>7.4f} {:>7.4f} {:>7.4f} {:>7.4f}\n", r.run,
                         r.n_folds, name, b->min, b->q1, b->median, b->q3, b->max, b->mean);
    }
  }

  if (out_dir) {
    ManifestWriter manifest("report", nullptr, *out_dir);
    for (const auto& p : inputs) manifest.input(p);
    std::string csv = "run,n_folds";
    for (const char* m : {"acc", "tpr", "tnr"}) {
      for (const char* s : {"min", "q1", "median", "q3", "max", "mean"}) csv += fmt::format(",{}_{}", m, s);
    }
    csv += '\n';
    Json j = Json::array();
    for (const auto& r : rows) {
      csv += fmt::format("{},{}", r.run, r.n_folds);
      for (const auto* b : {&r.stats.acc, &r.stats.tpr, &r.stats.tnr}) {
        for (double v : {b->min, b->q1, b->median, b->q3, b->max, b->mean}) csv += "," + format_metric(v);
      }
      csv += '\n';
      Json row = seizurenet::to_json(r.stats);
      row["run"] = r.run;
      row["n_folds"] = r.n_folds;
      j.push_back(row);
    }
    const fs::path out(*out_dir);
    io::write_file_atomic((out / "report.csv").string(), csv);
    io::write_file_atomic((out / "report.json").string(), j.dump(2) + "\n");
    manifest.output(out / "report.csv");
    manifest.output(out / "report.json");
    manifest.finish();
  }
  return rows;
}

}  // namespace seizurenet::pipeline
