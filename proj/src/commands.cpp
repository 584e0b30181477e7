#include "phil/commands.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

namespace phil {

namespace fs = std::filesystem;
using nlohmann::json;

namespace files {
std::string trace(InterfaceKind kind) { return std::string("trace_") + to_string(kind) + ".csv"; }
std::string sweep(InterfaceKind kind) { return std::string("sweep_") + to_string(kind) + ".csv"; }
}  // namespace files

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error(ErrorCode::InvalidArgument, "cannot format number");
  return std::string(buf, end);
}

namespace {

std::string format_17(double v) {
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteState, "controller artifact holds a non-finite value");
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 16);
  if (ec != std::errc()) throw Error(ErrorCode::InvalidArgument, "cannot format number");
  return std::string(buf, end);
}

std::ostream& log_of(const CommandContext& ctx) { return ctx.log ? *ctx.log : std::cerr; }

fs::path out_dir(const CommandContext& ctx) {
  fs::path dir(ctx.config.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void dump_config(const CommandContext& ctx, const fs::path& dir) {
  write_file(dir / files::kConfigDump, config_to_json(ctx.config).dump(2) + "\n");
}

void matrix_json(std::ostream& os, const Matrix& m) {
  os << "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << (i ? ",\n    [" : "\n    [");
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << format_17(m(i, j));
    os << "]";
  }
  os << (m.rows() ? "\n  ]" : "]");
}

template <typename Container>
void array_json(std::ostream& os, const Container& values) {
  os << "[";
  bool first = true;
  for (double v : values) {
    os << (first ? "" : ", ") << format_17(v);
    first = false;
  }
  os << "]";
}

Matrix matrix_from(const json& doc, const char* key, Eigen::Index rows, Eigen::Index cols) {
  if (!doc.contains(key) || !doc[key].is_array()) throw Error(ErrorCode::ParseError, std::string("artifact lacks ") + key);
  const json& a = doc[key];
  if (static_cast<Eigen::Index>(a.size()) != rows) {
    throw Error(ErrorCode::DimensionMismatch, std::string("artifact matrix ") + key + " has the wrong row count");
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = a[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::DimensionMismatch, std::string("artifact matrix ") + key + " has the wrong column count");
    }
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

template <std::size_t N>
void fill_array(const json& doc, const char* key, std::array<double, N>& out) {
  const json& a = doc.at("scaling").at(key);
  if (!a.is_array() || a.size() != N) throw Error(ErrorCode::ParseError, std::string("artifact scaling.") + key);
  for (std::size_t i = 0; i < N; ++i) out[i] = a[i].get<double>();
}

ControllerArtifact load_artifact(const CommandContext& ctx) {
  const fs::path path = fs::path(ctx.config.output_dir) / files::kController;
  if (!fs::exists(path)) {
    throw Error(ErrorCode::IoError, "controller artifact " + path.string() + " not found; run synth first");
  }
  return read_controller(path);
}

InterfaceAlgorithm make_interface(const CommandContext& ctx, InterfaceKind kind) {
  if (kind == InterfaceKind::ITM) {
    return itm_interface(ctx.config.itm_filter_cutoff_hz, ctx.config.scenario.sample_time);
  }
  const ControllerArtifact art = load_artifact(ctx);
  if (art.controller.sys.domain().sample_time() != ctx.config.scenario.sample_time) {
    throw Error(ErrorCode::DomainMismatch, "controller sample time differs from the configured sample_time");
  }
  return wrap_scaled_controller(art.controller, art.scaling);
}

std::string sweep_csv(const std::vector<std::pair<InterfaceKind, std::vector<SweepRow>>>& runs) {
  std::ostringstream os;
  os << "S,interface,stable,ss_rms_eV,ss_rms_eI,ss_rms_tV,ss_rms_tI\n";
  for (const auto& [kind, rows] : runs) {
    for (const SweepRow& r : rows) {
      os << format_double(r.scr) << ',' << to_string(kind) << ',' << (r.stable ? 1 : 0) << ','
         << format_double(r.metrics.ss_rms_eV) << ',' << format_double(r.metrics.ss_rms_eI) << ','
         << format_double(r.metrics.ss_rms_tV) << ',' << format_double(r.metrics.ss_rms_tI) << '\n';
    }
  }
  return os.str();
}

int report_rows(const CommandContext& ctx, InterfaceKind kind, const std::vector<SweepRow>& rows) {
  int code = kExitOk;
  for (const SweepRow& r : rows) {
    log_of(ctx) << to_string(kind) << " S=" << format_double(r.scr) << ": ";
    if (!r.error.empty()) {
      log_of(ctx) << "error: " << r.error << "\n";
      code = kExitError;
    } else if (r.stable) {
      log_of(ctx) << "stable, rms eV " << format_double(r.metrics.ss_rms_eV) << " V, rms eI "
                  << format_double(r.metrics.ss_rms_eI) << " A\n";
    } else {
      log_of(ctx) << "unstable\n";
    }
  }
  return code;
}

const char* kPlotScript = R"(import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "compare.csv"
rows = list(csv.DictReader(open(path)))
interfaces = ["hinf", "itm"]
labels = {"hinf": "H-infinity", "itm": "ITM"}
s_values = sorted({float(r["S"]) for r in rows})
fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharex=True)
for ax, key, unit in ((axes[0], "ss_rms_eV", "V"), (axes[1], "ss_rms_eI", "A")):
    width = 0.38
    for k, name in enumerate(interfaces):
        for i, s in enumerate(s_values):
            match = [r for r in rows if r["interface"] == name and float(r["S"]) == s]
            if not match:
                continue
            r = match[0]
            x = i + (k - 0.5) * width
            if r["stable"] == "1":
                ax.bar(x, float(r[key]), width, color="C%d" % k, label=labels[name] if i == 0 else None)
            else:
                ax.plot(x, 0.0, "x", color="C%d" % k, markersize=10)
                ax.annotate("unstable", (x, 0.0), textcoords="offset points", xytext=(0, 8),
                            ha="center", rotation=90, fontsize=8)
    ax.set_xticks(range(len(s_values)))
    ax.set_xticklabels(["%g" % s for s in s_values])
    ax.set_xlabel("short-circuit ratio S")
    ax.set_ylabel("steady-state rms %s [%s]" % (key.split("_")[-1], unit))
    ax.grid(axis="y", alpha=0.3)
axes[0].legend()
fig.tight_layout()
out = sys.argv[2] if len(sys.argv) > 2 else "compare.png"
fig.savefig(out, dpi=150)
)";

}  // namespace

void write_controller(const fs::path& path, const ControllerRealization& k, const ScalingSpec& scaling) {
  const StateSpace& s = k.sys;
  std::ostringstream os;
  os << "{\n";
  os << "  \"format\": \"phil-forge-controller\",\n";
  os << "  \"version\": 1,\n";
  os << "  \"sample_time\": " << format_17(s.domain().sample_time()) << ",\n";
  os << "  \"gamma\": " << format_17(k.gamma_achieved) << ",\n";
  os << "  \"gamma_infeasible\": " << format_17(k.report.gamma_infeasible) << ",\n";
  os << "  \"closed_loop_norm\": " << format_17(k.report.closed_loop_norm) << ",\n";
  os << "  \"backoffs\": " << k.report.backoffs << ",\n";
  os << "  \"control_irrelevant\": " << (k.report.control_irrelevant ? "true" : "false") << ",\n";
  os << "  \"states\": " << s.states() << ",\n";
  os << "  \"inputs\": " << s.inputs() << ",\n";
  os << "  \"outputs\": " << s.outputs() << ",\n";
  os << "  \"scaling\": {\n    \"w_scale\": " << format_17(scaling.w_scale) << ",\n    \"u_scales\": ";
  array_json(os, scaling.u_scales);
  os << ",\n    \"z_scales\": ";
  array_json(os, scaling.z_scales);
  os << ",\n    \"y_scales\": ";
  array_json(os, scaling.y_scales);
  os << "\n  },\n";
  const std::pair<const char*, const Matrix*> blocks[] = {{"A", &s.a()}, {"B", &s.b()}, {"C", &s.c()}, {"D", &s.d()}};
  for (std::size_t i = 0; i < 4; ++i) {
    os << "  \"" << blocks[i].first << "\": ";
    matrix_json(os, *blocks[i].second);
    os << (i + 1 < 4 ? ",\n" : "\n");
  }
  os << "}\n";
  write_file(path, os.str());
}

ControllerArtifact read_controller(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open controller artifact " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  try {
    if (doc.value("format", "") != "phil-forge-controller") {
      throw Error(ErrorCode::ParseError, path.string() + " is not a controller artifact");
    }
    const auto n = doc.at("states").get<Eigen::Index>();
    const auto m = doc.at("inputs").get<Eigen::Index>();
    const auto p = doc.at("outputs").get<Eigen::Index>();
    StateSpace sys(matrix_from(doc, "A", n, n), matrix_from(doc, "B", n, m), matrix_from(doc, "C", p, n),
                   matrix_from(doc, "D", p, m), TimeDomain::discrete(doc.at("sample_time").get<double>()));
    SynthesisReport report;
    report.gamma_infeasible = doc.at("gamma_infeasible").get<double>();
    report.gamma_feasible = doc.at("gamma").get<double>();
    report.closed_loop_norm = doc.at("closed_loop_norm").get<double>();
    report.backoffs = doc.at("backoffs").get<int>();
    report.control_irrelevant = doc.at("control_irrelevant").get<bool>();
    ScalingSpec scaling;
    scaling.w_scale = doc.at("scaling").at("w_scale").get<double>();
    fill_array(doc, "u_scales", scaling.u_scales);
    fill_array(doc, "z_scales", scaling.z_scales);
    fill_array(doc, "y_scales", scaling.y_scales);
    return {ControllerRealization{std::move(sys), report.gamma_feasible, report}, scaling};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

int cmd_synth(const CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  const fs::path dir = out_dir(ctx);
  dump_config(ctx, dir);
  const PartitionedPlant plant = assemble_plant(c.scenario, c.scaling, c.weights, c.objective);
  const ControllerRealization k = synthesize(plant, c.synthesis);
  write_controller(dir / files::kController, k, c.scaling);
  log_of(ctx) << "gamma " << format_double(k.gamma_achieved) << " (infeasible below "
              << format_double(k.report.gamma_infeasible) << "), closed-loop norm "
              << format_double(k.report.closed_loop_norm) << ", " << k.sys.states() << " states\n";
  return kExitOk;
}

int cmd_validate(const CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  const fs::path dir = out_dir(ctx);
  dump_config(ctx, dir);
  const ControllerArtifact art = load_artifact(ctx);
  const PartitionedPlant plant = assemble_plant(c.scenario, c.scaling, c.weights, c.objective);
  const ValidationReport r =
      validate_closed_loop(plant, art.controller.sys, c.validation.f_max_hz, c.validation.grid_points);

  std::ostringstream os;
  os << "freq_hz,channel,gain_db\n";
  for (std::size_t ch = 0; ch < r.channels.size(); ++ch) {
    const std::string name = r.channels[ch].input + "->" + r.channels[ch].output;
    for (std::size_t k = 0; k < r.frequencies_hz.size(); ++k) {
      os << format_double(r.frequencies_hz[k]) << ',' << name << ',' << format_double(r.gains_db[ch][k]) << '\n';
    }
  }
  write_file(dir / files::kFreqResp, os.str());

  log_of(ctx) << "closed loop " << (r.stable ? "stable" : "UNSTABLE") << ", hinf norm " << format_double(r.hinf_norm);
  if (r.worst) {
    log_of(ctx) << ", worst channel " << r.worst->input << "->" << r.worst->output << " "
                << format_double(r.worst->max_gain_db) << " dB at " << format_double(r.worst->at_hz) << " Hz";
  }
  log_of(ctx) << "\nvalidation " << (r.pass ? "PASS" : "FAIL") << "\n";
  return r.pass ? kExitOk : kExitValidationFail;
}

int cmd_simulate(const CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  const InterfaceKind kind = ctx.interface.value_or(InterfaceKind::HInf);
  const fs::path dir = out_dir(ctx);
  dump_config(ctx, dir);
  const InterfaceAlgorithm iface = make_interface(ctx, kind);
  const SimTrace trace = run_closed_loop(c.scenario, iface, c.sim);

  std::ostringstream os;
  os << "t,phase,V_grid,V1,I1,Vc,Id,V,J_B,V_ref,I_ref\n";
  for (std::size_t k = 0; k < trace.samples(); ++k) {
    const std::string t = format_double(static_cast<double>(k) * trace.sample_time);
    for (std::size_t p = 0; p < 3; ++p) {
      const PhaseTrace& ph = trace.phases[p];
      os << t << ',' << p << ',' << format_double(ph.v_grid[k]) << ',' << format_double(ph.v1[k]) << ','
         << format_double(ph.i1[k]) << ',' << format_double(ph.vc[k]) << ',' << format_double(ph.id[k]) << ','
         << format_double(ph.v[k]) << ',' << format_double(ph.jb[k]) << ',' << format_double(ph.v_ref[k]) << ','
         << format_double(ph.i_ref[k]) << '\n';
    }
  }
  write_file(dir / files::trace(kind), os.str());

  log_of(ctx) << to_string(kind) << " S=" << format_double(c.scenario.scr) << ": " << trace.samples() << " samples";
  if (trace.divergence_sample) {
    log_of(ctx) << ", diverged at t=" << format_double(static_cast<double>(*trace.divergence_sample) * trace.sample_time)
                << " s";
  } else if (trace.samples() > 0) {
    const AccuracyMetrics m = accuracy_metrics(trace, c.settle_fraction);
    log_of(ctx) << ", stable, peak eV " << format_double(m.peak_eV) << " V, peak eI " << format_double(m.peak_eI)
                << " A";
  }
  log_of(ctx) << "\n";
  return kExitOk;
}

int cmd_sweep(const CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  const InterfaceKind kind = ctx.interface.value_or(InterfaceKind::HInf);
  const fs::path dir = out_dir(ctx);
  dump_config(ctx, dir);
  const InterfaceAlgorithm iface = make_interface(ctx, kind);
  const auto rows = sweep_scr(c.scenario, iface, c.sweep_scr, c.sim, c.settle_fraction);
  write_file(dir / files::sweep(kind), sweep_csv({{kind, rows}}));
  return report_rows(ctx, kind, rows);
}

int cmd_compare(const CommandContext& ctx) {
  const RunConfig& c = ctx.config;
  const fs::path dir = out_dir(ctx);
  if (!fs::exists(dir / files::kController)) {
    log_of(ctx) << "no controller artifact; synthesizing\n";
    const int code = cmd_synth(ctx);
    if (code != kExitOk) return code;
  }
  dump_config(ctx, dir);
  std::vector<std::pair<InterfaceKind, std::vector<SweepRow>>> runs;
  int code = kExitOk;
  for (InterfaceKind kind : {InterfaceKind::HInf, InterfaceKind::ITM}) {
    const InterfaceAlgorithm iface = make_interface(ctx, kind);
    auto rows = sweep_scr(c.scenario, iface, c.sweep_scr, c.sim, c.settle_fraction);
    if (report_rows(ctx, kind, rows) != kExitOk) code = kExitError;
    runs.emplace_back(kind, std::move(rows));
  }
  write_file(dir / files::kCompare, sweep_csv(runs));
  write_file(dir / files::kPlotScript, kPlotScript);
  return code;
}

int run_command(const std::string& name, const CommandContext& ctx) {
  try {
    if (name == "synth") return cmd_synth(ctx);
    if (name == "validate") return cmd_validate(ctx);
    if (name == "simulate") return cmd_simulate(ctx);
    if (name == "sweep") return cmd_sweep(ctx);
    if (name == "compare") return cmd_compare(ctx);
    log_of(ctx) << "unknown command " << name << "\n";
  } catch (const std::exception& e) {
    log_of(ctx) << "error: " << e.what() << "\n";
  }
  return kExitError;
}

}  // namespace phil
