#pragma once

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "alert/model.hpp"
#include "alert/simulator.hpp"

namespace alert {

/// Malformed or unreadable input file. The message names the file and the
/// offending field.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                           const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw InputError(where + "." + key + ": unknown field");
  }
}

inline const json& field(const json& obj, const char* name, const std::string& where) {
  if (!obj.is_object()) throw InputError(where + ": expected an object");
  auto it = obj.find(name);
  if (it == obj.end()) throw InputError(where + "." + name + ": missing field");
  return *it;
}

inline double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw InputError(where + ": expected a number");
  return v.get<double>();
}

inline std::uint64_t unsigned_integer(const json& v, const std::string& where) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw InputError(where + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

inline const json& array(const json& v, const std::string& where) {
  if (!v.is_array()) throw InputError(where + ": expected an array");
  return v;
}

inline json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": invalid JSON: " + e.what());
  }
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Profiles

/// Parses a profile document. `origin` prefixes error messages (usually the
/// file path). The result is validated; any invariant violation is an error.
inline ConfigSpace profile_from_json(const nlohmann::json& doc, const std::string& origin) {
  using detail::field;
  using detail::number;
  ConfigSpace space;

  detail::reject_unknown(doc, {"powers", "p_idle_prof", "dnns"}, origin);
  const auto& powers = detail::array(field(doc, "powers", origin), origin + ".powers");
  for (std::size_t j = 0; j < powers.size(); ++j)
    space.powers.push_back({j, number(powers[j], origin + ".powers[" + std::to_string(j) + "]")});
  space.p_idle_prof = number(field(doc, "p_idle_prof", origin), origin + ".p_idle_prof");

  const auto& dnns = detail::array(field(doc, "dnns", origin), origin + ".dnns");
  for (std::size_t i = 0; i < dnns.size(); ++i) {
    const std::string where = origin + ".dnns[" + std::to_string(i) + "]";
    const auto& d = dnns[i];
    detail::reject_unknown(d, {"id", "kind", "q_fail", "num_classes", "stages"}, where);

    DnnProfile dnn;
    const auto& id = field(d, "id", where);
    if (!id.is_string()) throw InputError(where + ".id: expected a string");
    dnn.id = id.get<std::string>();

    const auto& kind = field(d, "kind", where);
    if (kind == "traditional")
      dnn.kind = DnnKind::Traditional;
    else if (kind == "anytime")
      dnn.kind = DnnKind::Anytime;
    else
      throw InputError(where + ".kind: expected \"traditional\" or \"anytime\"");

    if (d.contains("num_classes")) {
      const auto n = detail::unsigned_integer(d["num_classes"], where + ".num_classes");
      if (n == 0) throw InputError(where + ".num_classes: must be >= 1");
      dnn.num_classes = static_cast<int>(n);
    }
    if (d.contains("q_fail"))
      dnn.q_fail = number(d["q_fail"], where + ".q_fail");
    else if (dnn.num_classes)
      dnn.q_fail = 1.0 / *dnn.num_classes;
    else
      throw InputError(where + ".q_fail: required when num_classes is absent");

    const auto& stages = detail::array(field(d, "stages", where), where + ".stages");
    for (std::size_t s = 0; s < stages.size(); ++s) {
      const std::string sw = where + ".stages[" + std::to_string(s) + "]";
      detail::reject_unknown(stages[s], {"accuracy", "t_prof"}, sw);
      Stage st;
      st.accuracy = number(field(stages[s], "accuracy", sw), sw + ".accuracy");
      const auto& t = detail::array(field(stages[s], "t_prof", sw), sw + ".t_prof");
      for (std::size_t j = 0; j < t.size(); ++j)
        st.t_prof.push_back(number(t[j], sw + ".t_prof[" + std::to_string(j) + "]"));
      dnn.stages.push_back(std::move(st));
    }
    space.dnns.push_back(std::move(dnn));
  }

  if (const auto problems = validate(space); !problems.empty()) {
    std::string msg = origin + ": invalid profile:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw InputError(msg);
  }
  return space;
}

inline ConfigSpace load_profile(const std::string& path) {
  return profile_from_json(detail::parse_file(path), path);
}

inline nlohmann::json to_json(const ConfigSpace& space) {
  nlohmann::json doc;
  doc["powers"] = nlohmann::json::array();
  for (const auto& p : space.powers) doc["powers"].push_back(p.cap_watts);
  doc["p_idle_prof"] = space.p_idle_prof;
  doc["dnns"] = nlohmann::json::array();
  for (const auto& dnn : space.dnns) {
    nlohmann::json d;
    d["id"] = dnn.id;
    d["kind"] = std::string(to_string(dnn.kind));
    if (dnn.num_classes && dnn.q_fail == 1.0 / *dnn.num_classes)
      d["num_classes"] = *dnn.num_classes;
    else
      d["q_fail"] = dnn.q_fail;
    d["stages"] = nlohmann::json::array();
    for (const auto& st : dnn.stages) d["stages"].push_back({{"accuracy", st.accuracy}, {"t_prof", st.t_prof}});
    doc["dnns"].push_back(std::move(d));
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Traces

inline Trace trace_from_json(const nlohmann::json& doc, const std::string& origin) {
  using detail::field;
  using detail::number;
  Trace trace;

  detail::reject_unknown(doc, {"seed", "group_size", "phases"}, origin);
  trace.seed = detail::unsigned_integer(field(doc, "seed", origin), origin + ".seed");
  if (doc.contains("group_size") && !doc["group_size"].is_null())
    trace.group_size = detail::unsigned_integer(doc["group_size"], origin + ".group_size");

  const auto& phases = detail::array(field(doc, "phases", origin), origin + ".phases");
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const std::string where = origin + ".phases[" + std::to_string(i) + "]";
    const auto& p = phases[i];
    detail::reject_unknown(p, {"length", "dist", "idle_power_true", "input_noise_sd"}, where);

    EnvironmentPhase phase;
    phase.length = detail::unsigned_integer(field(p, "length", where), where + ".length");
    phase.idle_power_true = number(field(p, "idle_power_true", where), where + ".idle_power_true");
    if (p.contains("input_noise_sd"))
      phase.input_noise_sd = number(p["input_noise_sd"], where + ".input_noise_sd");

    const std::string dw = where + ".dist";
    const auto& dist = field(p, "dist", where);
    const auto& kind = field(dist, "kind", dw);
    auto num = [&](const char* name) { return number(field(dist, name, dw), dw + "." + name); };
    if (kind == "constant") {
      detail::reject_unknown(dist, {"kind", "value"}, dw);
      phase.dist = ConstantDist{num("value")};
    } else if (kind == "gaussian") {
      detail::reject_unknown(dist, {"kind", "mean", "sd"}, dw);
      phase.dist = GaussianDist{num("mean"), num("sd")};
    } else if (kind == "lognormal") {
      detail::reject_unknown(dist, {"kind", "mu_log", "sd_log"}, dw);
      phase.dist = LogNormalDist{num("mu_log"), num("sd_log")};
    } else if (kind == "uniform") {
      detail::reject_unknown(dist, {"kind", "lo", "hi"}, dw);
      phase.dist = UniformDist{num("lo"), num("hi")};
    } else {
      throw InputError(dw + ".kind: expected constant, gaussian, lognormal or uniform");
    }
    trace.phases.push_back(phase);
  }

  if (const auto problems = validate(trace); !problems.empty()) {
    std::string msg = origin + ": invalid trace:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw InputError(msg);
  }
  return trace;
}

inline Trace load_trace(const std::string& path) {
  return trace_from_json(detail::parse_file(path), path);
}

inline nlohmann::json to_json(const Trace& trace) {
  nlohmann::json doc;
  doc["seed"] = trace.seed;
  if (trace.group_size) doc["group_size"] = *trace.group_size;
  doc["phases"] = nlohmann::json::array();
  for (const auto& p : trace.phases) {
    nlohmann::json dist;
    if (const auto* c = std::get_if<ConstantDist>(&p.dist))
      dist = {{"kind", "constant"}, {"value", c->value}};
    else if (const auto* g = std::get_if<GaussianDist>(&p.dist))
      dist = {{"kind", "gaussian"}, {"mean", g->mean}, {"sd", g->sd}};
    else if (const auto* l = std::get_if<LogNormalDist>(&p.dist))
      dist = {{"kind", "lognormal"}, {"mu_log", l->mu_log}, {"sd_log", l->sd_log}};
    else if (const auto* u = std::get_if<UniformDist>(&p.dist))
      dist = {{"kind", "uniform"}, {"lo", u->lo}, {"hi", u->hi}};
    doc["phases"].push_back({{"length", p.length},
                             {"dist", dist},
                             {"idle_power_true", p.idle_power_true},
                             {"input_noise_sd", p.input_noise_sd}});
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Reports

/// printf-style "%.*g" so numeric output does not depend on stream state.
inline std::string format_number(double v, int precision = 10) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

inline constexpr std::string_view kStepCsvHeader =
    "input_index,dnn,power_watts,stage,latency_s,deadline_met,accuracy,energy_j,"
    "viol_latency,viol_accuracy,viol_energy,target_stage,xi";

/// One row per input. `stage` is the stage actually delivered (0 = fallback
/// answer), `latency_s` the inference latency, `xi` the slow-down
/// observation fed back to the estimator.
inline void write_step_csv(std::ostream& out, const ConfigSpace& space,
                           std::span<const StepRecord> records) {
  out << kStepCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.input_index << ',' << space.dnns[r.decision.dnn_index].id << ','
        << format_number(r.cap_watts) << ',' << r.completed_stage << ','
        << format_number(r.observed_latency) << ',' << int(r.deadline_met) << ','
        << format_number(r.delivered_accuracy) << ',' << format_number(r.energy) << ','
        << int(r.violations.latency) << ',' << int(r.violations.accuracy) << ','
        << int(r.violations.energy) << ',' << r.decision.target_stage << ','
        << format_number(r.xi) << '\n';
  }
}

inline nlohmann::json to_json(const PhaseSummary& s) {
  return {{"count", s.count},
          {"mean_energy_j", s.mean_energy},
          {"mean_accuracy", s.mean_accuracy},
          {"mean_error", s.mean_error},
          {"violation_rate_latency", s.latency_violation_rate},
          {"violation_rate_accuracy", s.accuracy_violation_rate},
          {"violation_rate_energy", s.energy_violation_rate},
          {"violation_rate_any", s.any_violation_rate}};
}

inline nlohmann::json to_json(const Summary& s) {
  nlohmann::json doc = to_json(s.overall);
  doc["total_inference_energy_j"] = s.total_inference_energy;
  doc["total_idle_energy_j"] = s.total_idle_energy;
  doc["phases"] = nlohmann::json::array();
  for (const auto& p : s.per_phase) doc["phases"].push_back(to_json(p));
  return doc;
}

/// Reads the `xi` column of a step CSV written by write_step_csv.
inline std::vector<double> read_xi_column(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ": empty file");

  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  const auto header = split(line);
  std::size_t col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == "xi") col = i;
  if (col == header.size()) throw InputError(path + ": no 'xi' column");

  std::vector<double> xi;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() <= col)
      throw InputError(path + ": row " + std::to_string(row) + ": missing xi");
    try {
      xi.push_back(std::stod(cells[col]));
    } catch (const std::exception&) {
      throw InputError(path + ": row " + std::to_string(row) + ": xi is not a number");
    }
  }
  return xi;
}

}  // namespace alert
