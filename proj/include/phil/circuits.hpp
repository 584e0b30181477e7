#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "phil/lti.hpp"

namespace phil {

/// Integer sample delays imposed on the measurement (y) and actuation (u)
/// channels. Measurement order: V1, Vc, I1, Id. Actuation order: V, J_B.
struct DelaySpec {
  std::array<std::size_t, 4> meas_delay_steps{1, 1, 1, 1};
  std::array<std::size_t, 2> act_delay_steps{1, 0};
  /// Extra delay on J_B that breaks the ROS/interface algebraic loop.
  std::size_t ros_act_extra = 1;

  std::size_t total_act_delay(std::size_t channel) const {
    return act_delay_steps.at(channel) + (channel == 1 ? ros_act_extra : 0);
  }
  void validate() const;
};

/// Physical and configuration parameters of one single-phase PHIL setup.
struct PhilScenario {
  double v_grid_rms = 120.0;
  double f0 = 60.0;
  double shunt_resistance = 1000.0;
  double dut_resistance = 24.0;
  double scr = 1.0;
  double xr_ratio = 1.0;
  std::vector<double> amplifier_num{6.221e9};
  std::vector<double> amplifier_den{1.0, 1.255e5, 6.099e9};
  double sample_time = 50e-6;
  DelaySpec delays;

  /// Per-phase rating of the DUT, V²/R2.
  double rated_power() const { return v_grid_rms * v_grid_rms / dut_resistance; }
  void validate() const;
};

/// Thévenin grid impedance Z1(s) = R1 + L1 s.
struct GridImpedance {
  double r1 = 0.0;
  double l1 = 0.0;
};

/// |Z1| = V²/(S·P_rated) = R2/S, split into R1 and L1 by the X/R ratio at f0.
GridImpedance grid_impedance_from_scr(const PhilScenario& scenario);

/// Inputs (V_grid, J_B), outputs (V1, I1). Continuous time.
StateSpace build_ros(const PhilScenario& scenario, const GridImpedance& z1);
/// Input V, outputs (Vc, Id). Continuous time.
StateSpace build_dut(const PhilScenario& scenario);
/// Input V_grid, outputs (V_ref, I_ref). Continuous time.
StateSpace build_ref(const PhilScenario& scenario, const GridImpedance& z1);

}  // namespace phil
