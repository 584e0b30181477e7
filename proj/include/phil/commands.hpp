#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "phil/config.hpp"
#include "phil/hinf.hpp"
#include "phil/interfaces.hpp"

namespace phil {

/// Process exit codes of the command layer.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitValidationFail = 2;

struct CommandContext {
  RunConfig config;
  /// Interface for simulate and sweep; defaults to the H∞ controller.
  std::optional<InterfaceKind> interface;
  std::ostream* log = nullptr;
};

/// File names inside the output directory.
namespace files {
inline constexpr const char* kController = "controller.json";
inline constexpr const char* kConfigDump = "config.json";
inline constexpr const char* kFreqResp = "freqresp.csv";
inline constexpr const char* kCompare = "compare.csv";
inline constexpr const char* kPlotScript = "compare_plot.py";
std::string trace(InterfaceKind kind);
std::string sweep(InterfaceKind kind);
}  // namespace files

/// Controller artifact: the controller acting on the scaled plant, with the
/// scalings and γ it was synthesized with. Matrices are written with 17
/// significant digits so a round trip is bit-exact.
struct ControllerArtifact {
  ControllerRealization controller;
  ScalingSpec scaling;
};

void write_controller(const std::filesystem::path& path, const ControllerRealization& k, const ScalingSpec& scaling);
ControllerArtifact read_controller(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double; locale-independent.
std::string format_double(double v);

int cmd_synth(const CommandContext& ctx);
int cmd_validate(const CommandContext& ctx);
int cmd_simulate(const CommandContext& ctx);
int cmd_sweep(const CommandContext& ctx);
int cmd_compare(const CommandContext& ctx);

/// Dispatches by name ("synth", "validate", ...). Library errors are reported
/// on the log and mapped to kExitError.
int run_command(const std::string& name, const CommandContext& ctx);

}  // namespace phil
