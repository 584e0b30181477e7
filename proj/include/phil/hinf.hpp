#pragma once

#include <optional>
#include <string>
#include <vector>

#include "phil/lti.hpp"

namespace phil {

struct SynthesisOptions {
  double gamma_lo = 1e-2;
  double gamma_hi = 1e4;
  double gamma_rel_tol = 1e-3;
  double riccati_tol = 1e-8;
  int max_iters = 200;
  /// Times the bracket may be widened by 10× when an endpoint has the wrong verdict.
  int bracket_expansions = 3;
  /// The controller is built at γ_feasible·(1 + suboptimality).
  double suboptimality = 0.0;

  void validate() const;
};

/// One feasibility test of the γ-iteration.
struct GammaTrial {
  double gamma = 0.0;
  bool feasible = false;
  std::string reason;  // why infeasible; empty when feasible
  double x_residual = 0.0;
  double y_residual = 0.0;
};

struct SynthesisReport {
  std::vector<GammaTrial> trials;
  /// Final bracket: infeasible below `gamma_infeasible`, feasible at `gamma_feasible`.
  double gamma_infeasible = 0.0;
  double gamma_feasible = 0.0;
  double x_residual = 0.0;
  double y_residual = 0.0;
  /// Closed-loop norm measured on the discrete closed loop after synthesis.
  double closed_loop_norm = 0.0;
  /// Number of 0.2% γ back-offs needed before the constructed controller verified.
  int backoffs = 0;
  bool control_irrelevant = false;
};

struct ControllerRealization {
  StateSpace sys;
  double gamma_achieved = 0.0;
  SynthesisReport report;
};

/// Discrete-time H∞ synthesis by γ-bisection. The discrete plant is mapped to a
/// continuous surrogate with the inverse bilinear transform, the two-Riccati
/// central controller is built there for general D11/D22, and the controller is
/// mapped back with the forward bilinear transform.
ControllerRealization synthesize(const PartitionedPlant& plant, const SynthesisOptions& options = {});

struct ChannelGain {
  std::string input;
  std::string output;
  double max_gain_db = 0.0;
  double at_hz = 0.0;
};

struct ValidationReport {
  bool stable = false;
  double hinf_norm = 0.0;
  std::vector<double> frequencies_hz;
  /// gains_db[channel][k]: channel index = output·n_w + input.
  std::vector<std::vector<double>> gains_db;
  std::vector<ChannelGain> channels;
  std::optional<ChannelGain> worst;
  bool pass = false;
};

/// Checks closed-loop stability and that every SISO channel w_j → z_i stays
/// below 0 dB on a log grid from 0.1 Hz to f_max (plus DC).
ValidationReport validate_closed_loop(const PartitionedPlant& plant, const StateSpace& controller, double f_max_hz,
                                      int grid_points = 1000);
ValidationReport validate_closed_loop(const PartitionedPlant& plant, const ControllerRealization& controller,
                                      double f_max_hz, int grid_points = 1000);

}  // namespace phil
