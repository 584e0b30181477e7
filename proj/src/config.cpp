#include "phil/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace phil {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::ValidationError, field + " " + what);
}

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Walks one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown fields.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) invalid(path_.empty() ? "config" : path_, "must be a JSON object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_number()) invalid(join(path_, key), "must be a number");
    out = v.get<double>();
  }

  template <typename Int>
  void integer(const std::string& key, Int& out, long long min_value) {
    if (!has(key)) return;
    out = static_cast<Int>(read_integer(node_.at(key), join(path_, key), min_value));
  }

  void numbers(const std::string& key, std::vector<double>& out, bool allow_empty = false) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    const std::string field = join(path_, key);
    if (!v.is_array()) invalid(field, "must be an array of numbers");
    if (v.empty() && !allow_empty) invalid(field, "must not be empty");
    std::vector<double> values;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) invalid(field + "[" + std::to_string(i) + "]", "must be a number");
      values.push_back(v[i].get<double>());
    }
    out = std::move(values);
  }

  template <std::size_t N>
  void numbers(const std::string& key, std::array<double, N>& out) {
    if (!has(key)) return;
    std::vector<double> values;
    numbers(key, values);
    if (values.size() != N) invalid(join(path_, key), "must have " + std::to_string(N) + " entries");
    std::copy(values.begin(), values.end(), out.begin());
  }

  template <std::size_t N>
  void steps(const std::string& key, std::array<std::size_t, N>& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    const std::string field = join(path_, key);
    if (!v.is_array() || v.size() != N) invalid(field, "must be an array of " + std::to_string(N) + " integers");
    for (std::size_t i = 0; i < N; ++i) {
      out[i] = static_cast<std::size_t>(read_integer(v[i], field + "[" + std::to_string(i) + "]", 0));
    }
  }

  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const json& v = node_.at(key);
    if (!v.is_string()) invalid(join(path_, key), "must be a string");
    out = v.get<std::string>();
  }

  Section child(const std::string& key) { return Section(node_.at(key), join(path_, key)); }

  void reject_unknown() const {
    for (const auto& item : node_.items()) {
      if (!seen_.count(item.key())) invalid(join(path_, item.key()), "is not a known field");
    }
  }

 private:
  static long long read_integer(const json& v, const std::string& field, long long min_value) {
    if (!v.is_number_integer()) {
      if (!(v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<long long>(v.get<double>())))) {
        invalid(field, "must be an integer");
      }
    }
    const long long value = v.is_number_unsigned() ? static_cast<long long>(v.get<unsigned long long>())
                                                   : static_cast<long long>(v.get<double>());
    if (value < min_value) invalid(field, "must be >= " + std::to_string(min_value));
    return value;
  }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_scenario(Section& root, PhilScenario& s) {
  root.number("v_grid_rms", s.v_grid_rms);
  root.number("f0", s.f0);
  root.number("shunt_resistance", s.shunt_resistance);
  root.number("dut_resistance", s.dut_resistance);
  root.number("scr", s.scr);
  root.number("xr_ratio", s.xr_ratio);
  root.numbers("amplifier_num", s.amplifier_num);
  root.numbers("amplifier_den", s.amplifier_den);
  root.number("sample_time", s.sample_time);
  if (root.has("delays")) {
    Section d = root.child("delays");
    d.steps("meas_delay_steps", s.delays.meas_delay_steps);
    d.steps("act_delay_steps", s.delays.act_delay_steps);
    d.integer("ros_act_extra", s.delays.ros_act_extra, 1);
    d.reject_unknown();
  }
}

Objective parse_objective(const std::string& name) {
  if (name == "transparency") return Objective::Transparency;
  if (name == "accuracy") return Objective::Accuracy;
  invalid("objective", "must be \"transparency\" or \"accuracy\"");
}

void read_config(const json& doc, RunConfig& c) {
  Section root(doc, "");
  read_scenario(root, c.scenario);

  if (root.has("scaling")) {
    Section s = root.child("scaling");
    s.number("w_scale", c.scaling.w_scale);
    s.numbers("u_scales", c.scaling.u_scales);
    s.numbers("z_scales", c.scaling.z_scales);
    s.numbers("y_scales", c.scaling.y_scales);
    s.reject_unknown();
  }
  if (root.has("weights")) {
    Section s = root.child("weights");
    s.number("w_filter_hz", c.weights.w_filter_hz);
    s.numbers("error_filters_hz", c.weights.error_filters_hz);
    s.numbers("actuation_filters_hz", c.weights.actuation_filters_hz);
    s.number("noise_weight", c.weights.noise_weight);
    s.reject_unknown();
  }
  if (root.has("objective")) {
    std::string name;
    root.string("objective", name);
    c.objective = parse_objective(name);
  }
  if (root.has("synthesis")) {
    Section s = root.child("synthesis");
    s.number("gamma_lo", c.synthesis.gamma_lo);
    s.number("gamma_hi", c.synthesis.gamma_hi);
    s.number("gamma_rel_tol", c.synthesis.gamma_rel_tol);
    s.number("riccati_tol", c.synthesis.riccati_tol);
    s.integer("max_iters", c.synthesis.max_iters, 1);
    s.integer("bracket_expansions", c.synthesis.bracket_expansions, 0);
    s.number("suboptimality", c.synthesis.suboptimality);
    s.reject_unknown();
  }
  if (root.has("validation")) {
    Section s = root.child("validation");
    s.number("f_max_hz", c.validation.f_max_hz);
    s.integer("grid_points", c.validation.grid_points, 2);
    s.reject_unknown();
  }
  if (root.has("itm")) {
    Section s = root.child("itm");
    s.number("filter_cutoff_hz", c.itm_filter_cutoff_hz);
    s.reject_unknown();
  }
  if (root.has("sweep")) {
    Section s = root.child("sweep");
    s.numbers("scr", c.sweep_scr);
    s.reject_unknown();
  }
  if (root.has("simulation")) {
    Section s = root.child("simulation");
    s.number("duration", c.sim.duration);
    s.number("divergence_factor", c.sim.divergence_factor);
    s.number("voltage_bound", c.sim.voltage_bound);
    s.number("current_bound", c.sim.current_bound);
    s.number("v_command_bound", c.sim.v_command_bound);
    s.number("jb_command_bound", c.sim.jb_command_bound);
    s.number("settle_fraction", c.settle_fraction);
    s.reject_unknown();
  }
  root.string("output_dir", c.output_dir);
  root.reject_unknown();
}

std::string location(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

void RunConfig::validate() const {
  try {
    scenario.validate();
    scaling.validate();
    weights.validate(scenario.sample_time);
    synthesis.validate();
    sim.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError) throw;
    throw Error(ErrorCode::ValidationError, e.what());
  }
  if (!(validation.f_max_hz > 0.0) || !std::isfinite(validation.f_max_hz)) invalid("validation.f_max_hz", "must be > 0");
  if (validation.grid_points < 2) invalid("validation.grid_points", "must be >= 2");
  const double nyquist = 0.5 / scenario.sample_time;
  if (!(itm_filter_cutoff_hz > 0.0) || !(itm_filter_cutoff_hz < nyquist)) {
    invalid("itm.filter_cutoff_hz", "must be in (0, Nyquist)");
  }
  if (sweep_scr.empty()) invalid("sweep.scr", "must not be empty");
  for (std::size_t i = 0; i < sweep_scr.size(); ++i) {
    if (!(sweep_scr[i] > 0.0) || !std::isfinite(sweep_scr[i])) {
      invalid("sweep.scr[" + std::to_string(i) + "]", "must be > 0");
    }
  }
  if (!(settle_fraction >= 0.0 && settle_fraction < 1.0)) invalid("simulation.settle_fraction", "must be in [0, 1)");
  if (output_dir.empty()) invalid("output_dir", "must not be empty");
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, location(text, e.byte) + ": " + e.what());
  }
  RunConfig config;
  read_config(doc, config);
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + std::string(e.what()).substr(to_string(e.code()).size() + 2));
  }
}

ordered_json config_to_json(const RunConfig& c) {
  const PhilScenario& s = c.scenario;
  const GridImpedance z1 = grid_impedance_from_scr(s);
  ordered_json j;
  j["v_grid_rms"] = s.v_grid_rms;
  j["f0"] = s.f0;
  j["shunt_resistance"] = s.shunt_resistance;
  j["dut_resistance"] = s.dut_resistance;
  j["scr"] = s.scr;
  j["xr_ratio"] = s.xr_ratio;
  j["amplifier_num"] = s.amplifier_num;
  j["amplifier_den"] = s.amplifier_den;
  j["sample_time"] = s.sample_time;
  j["delays"] = {{"meas_delay_steps", s.delays.meas_delay_steps},
                 {"act_delay_steps", s.delays.act_delay_steps},
                 {"ros_act_extra", s.delays.ros_act_extra}};
  j["scaling"] = {{"w_scale", c.scaling.w_scale},
                  {"u_scales", c.scaling.u_scales},
                  {"z_scales", c.scaling.z_scales},
                  {"y_scales", c.scaling.y_scales}};
  j["weights"] = {{"w_filter_hz", c.weights.w_filter_hz},
                  {"error_filters_hz", c.weights.error_filters_hz},
                  {"actuation_filters_hz", c.weights.actuation_filters_hz},
                  {"noise_weight", c.weights.noise_weight}};
  j["objective"] = to_string(c.objective);
  j["synthesis"] = {{"gamma_lo", c.synthesis.gamma_lo},
                    {"gamma_hi", c.synthesis.gamma_hi},
                    {"gamma_rel_tol", c.synthesis.gamma_rel_tol},
                    {"riccati_tol", c.synthesis.riccati_tol},
                    {"max_iters", c.synthesis.max_iters},
                    {"bracket_expansions", c.synthesis.bracket_expansions},
                    {"suboptimality", c.synthesis.suboptimality}};
  j["validation"] = {{"f_max_hz", c.validation.f_max_hz}, {"grid_points", c.validation.grid_points}};
  j["itm"] = {{"filter_cutoff_hz", c.itm_filter_cutoff_hz}};
  j["sweep"] = {{"scr", c.sweep_scr}};
  j["simulation"] = {{"duration", c.sim.duration},
                     {"divergence_factor", c.sim.divergence_factor},
                     {"voltage_bound", c.sim.voltage_bound},
                     {"current_bound", c.sim.current_bound},
                     {"v_command_bound", c.sim.v_command_bound},
                     {"jb_command_bound", c.sim.jb_command_bound},
                     {"settle_fraction", c.settle_fraction}};
  j["output_dir"] = c.output_dir;
  j["derived"] = {{"P_rated", s.rated_power()}, {"grid_r1", z1.r1}, {"grid_l1", z1.l1}};
  return j;
}

const char* to_string(Objective objective) {
  return objective == Objective::Transparency ? "transparency" : "accuracy";
}

}  // namespace phil
