#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "alert/io.hpp"
#include "alert/model.hpp"
#include "alert/policies.hpp"
#include "alert/presets.hpp"
#include "alert/profile_gen.hpp"
#include "alert/simulator.hpp"

// Implementations of the command-line subcommands. Each returns a process
// exit code: 0 on success, 2 on bad input.
namespace alert::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;

/// Deadline reference: mean profiled latency of the slowest anytime model at
/// the default cap (the slowest model overall when there is none).
inline double reference_latency(const ConfigSpace& space) {
  const std::size_t j = space.default_power_index();
  double ref = 0.0;
  bool any = false;
  for (const auto& d : space.dnns)
    if (d.is_anytime()) {
      ref = std::max(ref, d.final_stage().t_prof[j]);
      any = true;
    }
  if (!any)
    for (const auto& d : space.dnns) ref = std::max(ref, d.final_stage().t_prof[j]);
  return ref;
}

/// 1% of the mean profiled latency across models at the default cap.
inline double default_overhead(const ConfigSpace& space) {
  const std::size_t j = space.default_power_index();
  double sum = 0.0;
  for (const auto& d : space.dnns) sum += d.final_stage().t_prof[j];
  return 0.01 * sum / static_cast<double>(space.dnns.size());
}

/// FNV-1a, used to derive per-trace seeds from the top-level seed.
inline std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// `preset:<name>` selects a built-in trace; anything else is a file path.
/// With a top-level seed the trace seed is derived from it and the source.
inline Trace load_trace_arg(const std::string& source, std::optional<std::uint64_t> seed) {
  Trace t;
  constexpr std::string_view prefix = "preset:";
  if (source.rfind(prefix, 0) == 0) {
    try {
      t = presets::trace(source.substr(prefix.size()));
    } catch (const std::invalid_argument& e) {
      throw InputError(source + ": " + e.what());
    }
  } else {
    t = load_trace(source);
  }
  if (seed) t.seed = mix_seed(*seed, stable_hash(source));
  return t;
}

struct GoalArgs {
  Mode mode = Mode::MinimizeEnergy;
  double deadline_mult = 1.0;
  std::optional<double> deadline;  // absolute seconds; overrides the multiple
  std::optional<double> q_goal;
  std::optional<double> e_goal;
  std::optional<double> pr_th;
  std::optional<double> overhead;
};

inline ConstraintSpec make_spec(const ConfigSpace& space, const GoalArgs& g) {
  ConstraintSpec spec;
  spec.mode = g.mode;
  spec.t_goal = g.deadline ? *g.deadline : g.deadline_mult * reference_latency(space);
  spec.q_goal = g.q_goal;
  spec.e_goal = g.e_goal;
  spec.pr_threshold = g.pr_th;
  spec.overhead_budget = g.overhead ? *g.overhead : default_overhead(space);
  if (const auto problems = validate(spec); !problems.empty()) {
    std::string msg = "invalid goal:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw InputError(msg);
  }
  return spec;
}

struct RunArgs {
  std::string profile;
  std::string trace;
  std::string policy = "alert";
  GoalArgs goal;
  std::optional<std::uint64_t> seed;
  std::string out;
  RunOptions options;
};

inline std::string summary_path(const std::string& csv_path) {
  return std::filesystem::path(csv_path).replace_extension(".summary.json").string();
}

/// Output of one run, rendered but not yet written.
struct RunArtifacts {
  std::string csv;
  std::string summary_json;
  Summary summary;
};

inline RunArtifacts run_to_artifacts(const RunArgs& args) {
  const auto space = load_profile(args.profile);
  const auto trace = load_trace_arg(args.trace, args.seed);
  const auto spec = make_spec(space, args.goal);
  const auto env = realize(trace);

  std::unique_ptr<Policy> policy;
  try {
    policy = make_policy(args.policy, space, spec, trace, env, args.options);
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("--policy: ") + e.what());
  }
  const auto result = run(space, spec, trace, env, *policy, args.options);

  RunArtifacts art;
  std::ostringstream csv;
  write_step_csv(csv, space, result.records);
  art.csv = csv.str();

  nlohmann::json doc = to_json(result.summary);
  doc["policy"] = policy->name();
  doc["mode"] = std::string(to_string(spec.mode));
  doc["t_goal_s"] = spec.t_goal;
  doc["overhead_s"] = spec.overhead_budget;
  if (spec.q_goal) doc["q_goal"] = *spec.q_goal;
  if (spec.e_goal) doc["e_goal_j"] = *spec.e_goal;
  if (spec.pr_threshold) doc["pr_threshold"] = *spec.pr_threshold;
  doc["trace_seed"] = trace.seed;
  art.summary_json = doc.dump(2) + "\n";
  art.summary = result.summary;
  return art;
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path + ": cannot write file");
  out << text;
}

inline int cmd_run(const RunArgs& args, std::ostream& log = std::cerr) {
  try {
    const auto art = run_to_artifacts(args);
    write_file(args.out, art.csv);
    write_file(summary_path(args.out), art.summary_json);
    const auto& s = art.summary.overall;
    log << args.policy << ": " << s.count << " inputs, mean energy " << format_number(s.mean_energy, 6)
        << " J, mean accuracy " << format_number(s.mean_accuracy, 6) << ", violations (lat/acc/energy) "
        << format_number(s.latency_violation_rate, 4) << '/' << format_number(s.accuracy_violation_rate, 4)
        << '/' << format_number(s.energy_violation_rate, 4) << '\n';
    return kExitOk;
  } catch (const InputError& e) {
    log << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

// ---------------------------------------------------------------------------
// Sweep

struct SweepArgs {
  std::string profile;
  std::string trace;
  Mode mode = Mode::MinimizeEnergy;
  std::vector<double> deadline_mults;
  std::vector<double> q_goals;  // MinimizeEnergy
  std::vector<double> e_goals;  // MaximizeAccuracy
  std::vector<std::string> policies{"alert", "oracle-static"};
  std::optional<double> pr_th;
  std::optional<double> overhead;
  std::optional<std::uint64_t> seed;
  std::string out;
  RunOptions options;
};

struct SweepRow {
  double deadline_mult = 0.0;
  double t_goal = 0.0;
  double budget = 0.0;  // q_goal or e_goal depending on mode
  std::string policy;
  Summary summary;
  double objective = 0.0;
  double normalized = 0.0;
  bool static_eligible = false;
};

inline constexpr std::string_view kSweepCsvHeader =
    "deadline_mult,t_goal_s,goal,policy,objective,normalized_objective,static_eligible,"
    "mean_energy_j,mean_accuracy,viol_latency,viol_accuracy,viol_energy,viol_any";

/// Runs every policy on every (deadline, budget) cell. The objective of each
/// row is also reported relative to the static oracle of the same cell.
inline std::vector<SweepRow> sweep(const ConfigSpace& space, const Trace& trace,
                                   const SweepArgs& args) {
  const auto& budgets = args.mode == Mode::MinimizeEnergy ? args.q_goals : args.e_goals;
  if (args.deadline_mults.empty() || budgets.empty() || args.policies.empty())
    throw InputError("sweep: empty grid");

  const auto env = realize(trace);
  std::vector<SweepRow> rows;
  for (const double mult : args.deadline_mults)
    for (const double budget : budgets) {
      GoalArgs g;
      g.mode = args.mode;
      g.deadline_mult = mult;
      g.pr_th = args.pr_th;
      g.overhead = args.overhead;
      (args.mode == Mode::MinimizeEnergy ? g.q_goal : g.e_goal) = budget;
      const auto spec = make_spec(space, g);

      const auto stat = oracle_static_decision(space, spec, trace, env, args.options);
      const double static_obj = objective(stat.summary.overall, spec.mode);

      for (const auto& name : args.policies) {
        std::unique_ptr<Policy> policy;
        try {
          policy = make_policy(name, space, spec, trace, env, args.options);
        } catch (const std::invalid_argument& e) {
          throw InputError(std::string("--policies: ") + e.what());
        }
        const auto result = run(space, spec, trace, env, *policy, args.options);
        SweepRow row;
        row.deadline_mult = mult;
        row.t_goal = spec.t_goal;
        row.budget = budget;
        row.policy = name;
        row.summary = result.summary;
        row.objective = objective(result.summary.overall, spec.mode);
        row.normalized = static_obj > 0.0 ? row.objective / static_obj : 0.0;
        row.static_eligible = stat.eligible;
        rows.push_back(std::move(row));
      }
    }
  return rows;
}

inline std::string render_sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    const auto& s = r.summary.overall;
    out << format_number(r.deadline_mult) << ',' << format_number(r.t_goal) << ','
        << format_number(r.budget) << ',' << r.policy << ',' << format_number(r.objective) << ','
        << format_number(r.normalized) << ',' << int(r.static_eligible) << ','
        << format_number(s.mean_energy) << ',' << format_number(s.mean_accuracy) << ','
        << format_number(s.latency_violation_rate) << ',' << format_number(s.accuracy_violation_rate)
        << ',' << format_number(s.energy_violation_rate) << ',' << format_number(s.any_violation_rate)
        << '\n';
  }
  return out.str();
}

inline int cmd_sweep(const SweepArgs& args, std::ostream& log = std::cerr) {
  try {
    const auto space = load_profile(args.profile);
    const auto trace = load_trace_arg(args.trace, args.seed);
    const auto rows = sweep(space, trace, args);
    const auto csv = render_sweep_csv(rows);
    if (args.out.empty())
      std::cout << csv;
    else
      write_file(args.out, csv);
    log << "sweep: " << rows.size() << " rows\n";
    return kExitOk;
  } catch (const InputError& e) {
    log << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

// ---------------------------------------------------------------------------
// gen-profile

inline int cmd_gen_profile(const ProfileKnobs& knobs, const std::string& out,
                           std::ostream& log = std::cerr) {
  try {
    const auto space = generate_profile(knobs);
    if (const auto problems = validate(space); !problems.empty()) {
      for (const auto& p : problems) log << "error: generated profile invalid: " << p << '\n';
      return kExitInput;
    }
    const auto text = to_json(space).dump(2) + "\n";
    if (out.empty())
      std::cout << text;
    else
      write_file(out, text);
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const InputError& e) {
    log << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

// ---------------------------------------------------------------------------
// diag

inline std::string render_histogram_csv(const XiDiagnostics& d) {
  std::ostringstream out;
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < d.counts.size(); ++b) {
    const double lo = d.bin_lo + d.bin_width * static_cast<double>(b);
    out << format_number(lo) << ',' << format_number(lo + d.bin_width) << ',' << d.counts[b]
        << '\n';
  }
  return out.str();
}

/// Reads a run CSV and writes `<out>.hist.csv` plus `<out>.fit.json`.
inline int cmd_diag(const std::string& run_csv, const std::string& out,
                    std::ostream& log = std::cerr) {
  try {
    const auto xi = read_xi_column(run_csv);
    if (xi.size() < 30)
      throw InputError(run_csv + ": need at least 30 rows, found " + std::to_string(xi.size()));
    const auto d = xi_diagnostics(xi);
    const nlohmann::json fit{{"count", xi.size()}, {"mean", d.mean}, {"sd", d.sd},
                             {"bins", d.counts.size()}, {"bin_lo", d.bin_lo},
                             {"bin_width", d.bin_width}};
    write_file(out + ".hist.csv", render_histogram_csv(d));
    write_file(out + ".fit.json", fit.dump(2) + "\n");
    log << "xi: n=" << xi.size() << " mean=" << format_number(d.mean, 6)
        << " sd=" << format_number(d.sd, 6) << '\n';
    return kExitOk;
  } catch (const InputError& e) {
    log << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace alert::cli
