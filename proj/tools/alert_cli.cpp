// Command-line front end: run, sweep, gen-profile, diag.

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "alert/commands.hpp"

namespace {

void add_kalman_flags(CLI::App* cmd, alert::RunOptions& opts) {
  cmd->add_option("--kalman.r", opts.slowdown.r, "Measurement noise R");
  cmd->add_option("--kalman.q0", opts.slowdown.q0, "Process-noise floor Q0");
  cmd->add_option("--kalman.alpha", opts.slowdown.alpha, "Process-noise forgetting factor");
  cmd->add_option("--kalman.k0", opts.slowdown.k0, "Initial Kalman gain");
  cmd->add_flag("--kalman.current-gain", opts.slowdown.sigma_uses_current_gain,
                "Use the current gain in the variance update");
}

const std::map<std::string, alert::Mode> kModes{{"min-energy", alert::Mode::MinimizeEnergy},
                                                {"max-accuracy", alert::Mode::MaximizeAccuracy}};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coordinated DNN / power-cap controller simulator"};
  app.require_subcommand(1);

  // run
  alert::cli::RunArgs run;
  std::optional<std::uint64_t> run_seed;
  auto* run_cmd = app.add_subcommand("run", "Run one policy over one trace");
  run_cmd->add_option("--profile", run.profile, "Profile JSON")->required();
  run_cmd->add_option("--trace", run.trace, "Trace JSON or preset:<name>")->required();
  run_cmd->add_option("--policy", run.policy)
      ->check(CLI::IsMember(alert::policy_names()))
      ->capture_default_str();
  std::string run_mode = "min-energy";
  run_cmd->add_option("--mode", run_mode)->check(CLI::IsMember(kModes))->capture_default_str();
  run_cmd->add_option("--deadline-mult", run.goal.deadline_mult,
                      "Deadline as a multiple of the slowest anytime model's latency")
      ->capture_default_str();
  run_cmd->add_option("--deadline", run.goal.deadline, "Absolute deadline in seconds");
  run_cmd->add_option("--q-goal", run.goal.q_goal, "Accuracy goal (min-energy)");
  run_cmd->add_option("--e-goal", run.goal.e_goal, "Energy budget in joules (max-accuracy)");
  run_cmd->add_option("--pr-th", run.goal.pr_th, "Probabilistic threshold");
  run_cmd->add_option("--overhead", run.goal.overhead, "Scheduler overhead budget in seconds");
  run_cmd->add_option("--seed", run_seed, "Top-level seed");
  run_cmd->add_option("--out", run.out, "Per-step CSV path")->required();
  add_kalman_flags(run_cmd, run.options);

  // sweep
  alert::cli::SweepArgs sweep;
  std::optional<std::uint64_t> sweep_seed;
  auto* sweep_cmd = app.add_subcommand("sweep", "Constraint grid x policies");
  sweep_cmd->add_option("--profile", sweep.profile)->required();
  sweep_cmd->add_option("--trace", sweep.trace)->required();
  std::string sweep_mode = "min-energy";
  sweep_cmd->add_option("--mode", sweep_mode)->check(CLI::IsMember(kModes))->capture_default_str();
  sweep_cmd->add_option("--deadline-mult", sweep.deadline_mults)->delimiter(',')->required();
  sweep_cmd->add_option("--q-goal", sweep.q_goals)->delimiter(',');
  sweep_cmd->add_option("--e-goal", sweep.e_goals)->delimiter(',');
  sweep_cmd->add_option("--policy", sweep.policies)
      ->delimiter(',')
      ->check(CLI::IsMember(alert::policy_names()));
  sweep_cmd->add_option("--pr-th", sweep.pr_th);
  sweep_cmd->add_option("--overhead", sweep.overhead);
  sweep_cmd->add_option("--seed", sweep_seed);
  sweep_cmd->add_option("--out", sweep.out, "Output CSV (stdout when omitted)");
  add_kalman_flags(sweep_cmd, sweep.options);

  // gen-profile
  alert::ProfileKnobs knobs;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen-profile", "Generate a synthetic profile");
  gen_cmd->add_option("--dnns", knobs.dnn_count)->capture_default_str();
  gen_cmd->add_option("--anytime", knobs.anytime_count)->capture_default_str();
  gen_cmd->add_option("--stages", knobs.anytime_stages)->capture_default_str();
  gen_cmd->add_option("--best-accuracy", knobs.best_accuracy)->capture_default_str();
  gen_cmd->add_option("--error-spread", knobs.error_spread)->capture_default_str();
  gen_cmd->add_option("--min-latency", knobs.min_latency)->capture_default_str();
  gen_cmd->add_option("--latency-spread", knobs.latency_spread)->capture_default_str();
  gen_cmd->add_option("--power-exponent", knobs.power_exponent)->capture_default_str();
  gen_cmd->add_option("--power-min", knobs.power_min)->capture_default_str();
  gen_cmd->add_option("--power-max", knobs.power_max)->capture_default_str();
  gen_cmd->add_option("--power-step", knobs.power_step)->capture_default_str();
  gen_cmd->add_option("--idle-power", knobs.p_idle_prof)->capture_default_str();
  gen_cmd->add_option("--classes", knobs.num_classes)->capture_default_str();
  gen_cmd->add_option("--seed", knobs.seed)->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "Output JSON (stdout when omitted)");

  // diag
  std::string diag_in;
  std::string diag_out;
  auto* diag_cmd = app.add_subcommand("diag", "Slow-down histogram and Gaussian fit of a run");
  diag_cmd->add_option("--in", diag_in, "Run CSV")->required();
  diag_cmd->add_option("--out", diag_out, "Output prefix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : alert::cli::kExitInput;
  }

  if (*run_cmd) {
    run.seed = run_seed;
    run.goal.mode = kModes.at(run_mode);
    return alert::cli::cmd_run(run);
  }
  if (*sweep_cmd) {
    sweep.seed = sweep_seed;
    sweep.mode = kModes.at(sweep_mode);
    return alert::cli::cmd_sweep(sweep);
  }
  if (*gen_cmd) return alert::cli::cmd_gen_profile(knobs, gen_out);
  if (*diag_cmd) return alert::cli::cmd_diag(diag_in, diag_out);
  return alert::cli::kExitInput;
}
