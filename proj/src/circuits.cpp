#include "phil/circuits.hpp"

#include <cmath>
#include <numbers>

namespace phil {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::ValidationError, message);
}

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

void require_impedance(const GridImpedance& z1) {
  if (!(z1.r1 >= 0.0) || !(z1.l1 >= 0.0) || !std::isfinite(z1.r1) || !std::isfinite(z1.l1)) {
    throw Error(ErrorCode::InvalidArgument, "grid impedance needs R1 >= 0 and L1 >= 0");
  }
}

}  // namespace

void DelaySpec::validate() const {
  require(ros_act_extra >= 1, "delays.ros_act_extra must be >= 1");
}

void PhilScenario::validate() const {
  require(positive(v_grid_rms), "v_grid_rms must be > 0");
  require(positive(f0), "f0 must be > 0");
  require(positive(shunt_resistance), "shunt_resistance must be > 0");
  require(positive(dut_resistance), "dut_resistance must be > 0");
  require(positive(scr), "scr must be > 0");
  require(xr_ratio >= 0.0 && std::isfinite(xr_ratio), "xr_ratio must be >= 0");
  require(positive(sample_time), "sample_time must be > 0");
  require(!amplifier_den.empty() && amplifier_den.front() != 0.0,
          "amplifier_den needs a nonzero leading coefficient");
  require(!amplifier_num.empty(), "amplifier_num must not be empty");
  std::size_t num_degree = amplifier_num.size() - 1;
  for (std::size_t i = 0; i + 1 < amplifier_num.size() && amplifier_num[i] == 0.0; ++i) --num_degree;
  require(num_degree <= amplifier_den.size() - 1, "amplifier transfer function must be proper");
  delays.validate();
}

GridImpedance grid_impedance_from_scr(const PhilScenario& scenario) {
  scenario.validate();
  const double v2 = scenario.v_grid_rms * scenario.v_grid_rms;
  const double magnitude = v2 / (scenario.scr * scenario.rated_power());
  GridImpedance z1;
  z1.r1 = magnitude / std::sqrt(1.0 + scenario.xr_ratio * scenario.xr_ratio);
  z1.l1 = z1.r1 * scenario.xr_ratio / (2.0 * std::numbers::pi * scenario.f0);
  return z1;
}

StateSpace build_ros(const PhilScenario& scenario, const GridImpedance& z1) {
  require_impedance(z1);
  const double rj = scenario.shunt_resistance;
  const auto domain = TimeDomain::continuous();
  if (z1.l1 == 0.0) {
    Matrix d(2, 2);
    d << rj, -rj * z1.r1, 1.0, rj;
    return StateSpace::gain(d / (rj + z1.r1), domain);
  }
  // State: current I1 through Z1. L1 dI1/dt = V_grid + Rj J_B − (Rj + R1) I1,
  // V1 = Rj (I1 − J_B).
  Matrix a(1, 1), b(1, 2), c(2, 1), d(2, 2);
  a << -(rj + z1.r1) / z1.l1;
  b << 1.0 / z1.l1, rj / z1.l1;
  c << rj, 1.0;
  d << 0.0, -rj, 0.0, 0.0;
  return StateSpace(a, b, c, d, domain);
}

StateSpace build_dut(const PhilScenario& scenario) {
  const StateSpace amp = realize_tf({scenario.amplifier_num, scenario.amplifier_den, TimeDomain::continuous()});
  Matrix out(2, 1);
  out << 1.0, 1.0 / scenario.dut_resistance;
  return StateSpace(amp.a(), amp.b(), out * amp.c(), out * amp.d(), amp.domain());
}

StateSpace build_ref(const PhilScenario& scenario, const GridImpedance& z1) {
  require_impedance(z1);
  const double r2 = scenario.dut_resistance;
  const auto domain = TimeDomain::continuous();
  Matrix out(2, 1);
  out << r2, 1.0;
  if (z1.l1 == 0.0) return StateSpace::gain(out / (r2 + z1.r1), domain);
  // State: I_ref. L1 dI/dt = V_grid − (R1 + R2) I.
  Matrix a(1, 1), b(1, 1);
  a << -(z1.r1 + r2) / z1.l1;
  b << 1.0 / z1.l1;
  return StateSpace(a, b, out, Matrix::Zero(2, 1), domain);
}

}  // namespace phil
