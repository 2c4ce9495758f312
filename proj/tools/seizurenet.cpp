// seizurenet: command-line driver for the seizure-prediction pipeline.
//
// Exit codes: 0 ok, 1 unexpected error, 2 config error, 3 data error,
// 4 insufficient seizures, 5 verification failed, 6 I/O error.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "seizurenet/net/fault_injection.hpp"
#include "seizurenet/pipeline/commands.hpp"

namespace sp = seizurenet::pipeline;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "pipeline config (JSON); built-in synthetic config when omitted");
    cmd->add_option("--out", out, "output directory (overrides output_dir)");
    cmd->add_option("--seed", seed, "use this value for the data, init and train seeds");
  }

  sp::PipelineConfig load() const {
    auto config = config_path.empty() ? sp::synthetic_default_config() : sp::load_config(config_path);
    sp::apply_overrides(config, {out, seed});
    return config;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seizure prediction with a multi-scale dilated 3D CNN"};
  app.set_version_flag("--version", sp::tool_version());
  app.require_subcommand(1);

  CommonFlags synth_flags, pre_flags, train_flags, cv_flags;
  auto* make_synth = app.add_subcommand("make-synth", "write synthetic EDF files and a summary");
  synth_flags.attach(make_synth);
  auto* preprocess = app.add_subcommand("preprocess", "segment and featurize into the dataset cache");
  pre_flags.attach(preprocess);

  auto* train = app.add_subcommand("train", "train and evaluate one leave-one-out fold");
  train_flags.attach(train);
  std::int64_t fold = 0;
  train->add_option("--fold", fold, "held-out leading seizure")->required();

  auto* crossval = app.add_subcommand("crossval", "leave-one-seizure-out cross-validation");
  cv_flags.attach(crossval);

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference checks of every backward pass");
  std::string gc_config;
  std::optional<std::uint64_t> gc_seed;
  std::string fault = "none";
  gradcheck->add_option("--config", gc_config, "accepted for uniformity; the checks use fixed tiny shapes");
  gradcheck->add_option("--seed", gc_seed, "seed for the random test shapes");
  gradcheck->add_option("--inject-fault", fault, "deliberately break a backward pass (testing)")
      ->check(CLI::IsMember({"none", "conv-sign"}))
      ->group("");

  auto* report = app.add_subcommand("report", "compare cross-validation runs");
  std::vector<std::string> runs;
  std::optional<std::string> report_out;
  report->add_option("runs", runs, "run directories holding folds.csv")->required();
  report->add_option("--out", report_out, "directory for report.csv and report.json");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*make_synth) {
      sp::cmd_make_synth(synth_flags.load(), std::cout);
    } else if (*preprocess) {
      sp::cmd_preprocess(pre_flags.load(), std::cout);
    } else if (*train) {
      sp::cmd_train(train_flags.load(), fold, std::cout);
    } else if (*crossval) {
      sp::cmd_crossval(cv_flags.load(), std::cout);
    } else if (*gradcheck) {
      if (!gc_config.empty()) (void)sp::load_config(gc_config);
      seizurenet::net::GradcheckOptions options;
      if (gc_seed) options.seed = *gc_seed;
      seizurenet::net::testing::ScopedFault guard(fault == "conv-sign" ? seizurenet::net::testing::Fault::ConvBackwardSign
                                                                       : seizurenet::net::testing::Fault::None);
      if (!sp::cmd_gradcheck(options, std::cout).passed) return sp::kExitVerificationFailed;
    } else if (*report) {
      sp::cmd_report(runs, report_out, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return sp::exit_code_for(e);
  }
  return sp::kExitOk;
}
