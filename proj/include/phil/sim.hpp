#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "phil/interfaces.hpp"
#include "phil/plant.hpp"

namespace phil {

struct SimOptions {
  double duration = 1.0;
  /// A signal beyond divergence_factor × its nominal bound flags divergence.
  double divergence_factor = 50.0;
  /// Nominal bounds: grid-side voltages, currents, V command, J_B command.
  double voltage_bound = 120.0;
  double current_bound = 10.0;
  double v_command_bound = 200.0;
  double jb_command_bound = 15.0;

  void validate() const;
};

struct PhaseTrace {
  std::vector<double> v_grid, v1, i1, vc, id, v, jb, v_ref, i_ref;
};

struct SimTrace {
  double sample_time = 0.0;
  double f0 = 60.0;
  std::array<PhaseTrace, 3> phases;
  /// First sample at which a signal exceeded its bound; the run stops there.
  std::optional<std::size_t> divergence_sample;
  std::size_t samples() const { return phases[0].v1.size(); }
};

struct AccuracyMetrics {
  bool stable = false;
  double ss_rms_eV = 0.0;
  double ss_rms_eI = 0.0;
  double ss_rms_tV = 0.0;
  double ss_rms_tI = 0.0;
  double peak_eV = 0.0;
  double peak_eI = 0.0;
};

/// Phase k: v_rms·√2·sin(2π f0 t − 2πk/3) at t = 0, Ts, …; ⌈duration/Ts⌉ samples.
std::array<std::vector<double>, 3> three_phase_source(double v_rms, double f0, double sample_time, double duration);

/// Closed loop of the physical interconnection and the interface:
/// input V_grid, outputs (V_ref, I_ref, V1, Vc, I1, Id, V, J_B).
StateSpace closed_loop_system(const PhilScenario& scenario, const InterfaceAlgorithm& interface);

SimTrace run_closed_loop(const PhilScenario& scenario, const InterfaceAlgorithm& interface,
                         const SimOptions& options = {});

/// Worst case over the three phases. Metrics other than `stable` are zero when
/// the run diverged.
AccuracyMetrics accuracy_metrics(const SimTrace& trace, double settle_fraction = 0.5);

struct SweepRow {
  double scr = 0.0;
  bool stable = false;
  AccuracyMetrics metrics;
  std::string error;  // non-empty if the row could not be simulated
};

/// Runs the fixed interface against the plant rebuilt at each S. Rows run
/// concurrently on up to max_sweep_threads() threads; order follows s_values.
std::vector<SweepRow> sweep_scr(const PhilScenario& scenario_template, const InterfaceAlgorithm& interface,
                                const std::vector<double>& s_values, const SimOptions& options = {},
                                double settle_fraction = 0.5);

/// Hardware threads, capped by PHIL_FORGE_THREADS when set.
unsigned max_sweep_threads();

struct ThresholdResult {
  double s_star = 0.0;
  double lo = 0.0;  // unstable
  double hi = 0.0;  // stable
  int iterations = 0;
};

/// Bisection on S over ITM simulation stability. Requires divergence at s_lo
/// and stability at s_hi.
ThresholdResult find_itm_threshold(const PhilScenario& scenario_template, double filter_cutoff_hz, double s_lo,
                                   double s_hi, double tol, const SimOptions& options = {});

}  // namespace phil
