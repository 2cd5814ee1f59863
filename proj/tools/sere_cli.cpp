// Command-line frontend for the sere shared library. Everything of substance
// happens behind the C API; this file only parses arguments, loads the config
// text, and reports results.

#include <sere/sere.h>

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct Args {
  std::string config;
  std::string out;
  std::string stream;
  std::uint64_t seed = 0;
  double gate = 0.0;
  double tau = 0.0;
  bool skip_stale = false;
  bool force = false;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* gate_opt = nullptr;
  CLI::Option* tau_opt = nullptr;
};

// --config accepts either a JSON file path or a built-in preset name.
bool load_config_text(const std::string& arg, std::string& text, std::string& error) {
  std::ifstream in(arg, std::ios::binary);
  if (in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
    return true;
  }
  const bool looks_like_path =
      arg.find('/') != std::string::npos || arg.find(".json") != std::string::npos;
  if (looks_like_path) {
    error = "cannot open config file: " + arg;
    return false;
  }
  text = "{\"preset\": \"" + arg + "\"}";
  return true;
}

void add_common(CLI::App* cmd, Args& args, bool with_seed, bool with_filter_knobs) {
  cmd->add_option("--config", args.config,
                  "Config file or preset name (" + std::string(sere_config_presets()) + ")")
      ->required();
  cmd->add_option("--out", args.out, "Primary output file; siblings derive from its stem")
      ->required();
  if (with_seed) {
    args.seed_opt = cmd->add_option("--seed", args.seed, "Override the config's seed");
  }
  if (with_filter_knobs) {
    args.gate_opt = cmd->add_option(
        "--gate", args.gate, "Squared Mahalanobis acceptance threshold, applied to all modalities");
    args.tau_opt = cmd->add_option("--tau", args.tau, "Knot interval in seconds");
  }
  cmd->add_flag("--force", args.force, "Overwrite existing output files");
}

int dispatch(const std::string& command, const Args& args) {
  std::string config_text;
  std::string error;
  if (!load_config_text(args.config, config_text, error)) {
    std::fprintf(stderr, "error: IoError: %s\n", error.c_str());
    return 1;
  }

  sere_run_options options{};
  options.has_seed = args.seed_opt != nullptr && args.seed_opt->count() > 0;
  options.seed = args.seed;
  options.has_gate = args.gate_opt != nullptr && args.gate_opt->count() > 0;
  options.gate = args.gate;
  options.has_tau = args.tau_opt != nullptr && args.tau_opt->count() > 0;
  options.tau = args.tau;
  options.skip_stale = args.skip_stale ? 1 : 0;
  options.force = args.force ? 1 : 0;

  char* summary = nullptr;
  sere_status status = SERE_OK;
  if (command == "simulate") {
    status = sere_run_simulate(config_text.c_str(), args.out.c_str(), &options, &summary);
  } else if (command == "track") {
    status = sere_run_track(config_text.c_str(), args.stream.c_str(), args.out.c_str(), &options,
                            &summary);
  } else if (command == "mc") {
    status = sere_run_mc(config_text.c_str(), args.out.c_str(), &options, &summary);
  } else if (command == "evaluate") {
    status = sere_run_evaluate(config_text.c_str(), args.out.c_str(), &options, &summary);
  } else if (command == "sweep") {
    status = sere_run_sweep(config_text.c_str(), args.out.c_str(), &options, &summary);
  }

  if (status != SERE_OK) {
    // sere_last_error() already leads with the status name.
    const char* msg = sere_last_error();
    const bool has_msg = msg != nullptr && msg[0] != '\0';
    std::fprintf(stderr, "error: %s\n", has_msg ? msg : sere_status_name(status));
    sere_string_free(summary);
    return 1;
  }
  if (summary != nullptr) {
    std::fputs(summary, stdout);
    sere_string_free(summary);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("sere ") + sere_version() +
               " - continuous-time trajectory estimation from asynchronous measurement streams"};
  app.require_subcommand(1);

  Args simulate_args;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Synthesize a measurement stream, ground truth, and outlier log");
  add_common(simulate, simulate_args, /*with_seed=*/true, /*with_filter_knobs=*/false);

  Args track_args;
  CLI::App* track =
      app.add_subcommand("track", "Run the estimator over a stream file and export the trajectory");
  track->add_option("stream", track_args.stream, "Measurement stream CSV")->required();
  add_common(track, track_args, /*with_seed=*/false, /*with_filter_knobs=*/true);
  track->add_flag("--skip-stale", track_args.skip_stale,
                  "Skip measurements older than the live window instead of aborting");

  Args mc_args;
  CLI::App* mc = app.add_subcommand("mc", "Monte Carlo evaluation with aggregate statistics");
  add_common(mc, mc_args, /*with_seed=*/true, /*with_filter_knobs=*/true);

  Args evaluate_args;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Per-seed metric table with baselines");
  add_common(evaluate, evaluate_args, /*with_seed=*/true, /*with_filter_knobs=*/true);

  Args sweep_args;
  CLI::App* sweep =
      app.add_subcommand("sweep", "Process-noise-ratio x knot-interval grid search");
  add_common(sweep, sweep_args, /*with_seed=*/true, /*with_filter_knobs=*/false);

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) return dispatch("simulate", simulate_args);
  if (track->parsed()) return dispatch("track", track_args);
  if (mc->parsed()) return dispatch("mc", mc_args);
  if (evaluate->parsed()) return dispatch("evaluate", evaluate_args);
  if (sweep->parsed()) return dispatch("sweep", sweep_args);
  return 1;
}
