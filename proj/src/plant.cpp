#include "phil/plant.hpp"

#include <numbers>
#include <string>
#include <vector>

#include "phil/discretization.hpp"

namespace phil {

namespace {

StateSpace identity_gain(Eigen::Index n, TimeDomain domain) {
  return StateSpace::gain(Matrix::Identity(n, n), domain);
}

StateSpace diagonal(const std::vector<StateSpace>& blocks) {
  StateSpace out = blocks.front();
  for (std::size_t i = 1; i < blocks.size(); ++i) out = block_diagonal(out, blocks[i]);
  return out;
}

void require_cutoff(double hz, double sample_time, const char* name) {
  if (!(hz > 0.0) || !std::isfinite(hz)) {
    throw Error(ErrorCode::ValidationError, std::string(name) + " cutoff must be > 0");
  }
  if (hz >= 0.5 / sample_time) {
    throw Error(ErrorCode::CutoffAboveNyquist,
                std::string(name) + " cutoff " + std::to_string(hz) + " Hz is not below Nyquist");
  }
}

// Signals produced by the core interconnection, in this order.
enum Signal : Eigen::Index { kV1, kI1, kVc, kId, kVref, kIref, kV, kJB, kSignalCount };

// Inputs (V_grid, V, J_B) → the eight signals above, with actuation delays
// applied before the ROS and DUT models.
StateSpace core_interconnection(const PhilScenario& scenario) {
  scenario.validate();
  const double ts = scenario.sample_time;
  const auto domain = TimeDomain::discrete(ts);
  const GridImpedance z1 = grid_impedance_from_scr(scenario);

  const StateSpace ros = bilinear(build_ros(scenario, z1), ts);
  const StateSpace dut = zoh(build_dut(scenario), ts);
  const StateSpace ref = bilinear(build_ref(scenario, z1), ts);

  const StateSpace act = diagonal({identity_gain(1, domain), delay_block(scenario.delays.total_act_delay(0), ts),
                                   delay_block(scenario.delays.total_act_delay(1), ts)});
  // [Vg, Vd, JBd] → [Vg, JBd, Vd, Vg]
  Matrix route = Matrix::Zero(4, 3);
  route(0, 0) = 1.0;
  route(1, 2) = 1.0;
  route(2, 1) = 1.0;
  route(3, 0) = 1.0;
  const StateSpace circuits = series(series(act, StateSpace::gain(route, domain)), diagonal({ros, dut, ref}));

  Matrix pass = Matrix::Zero(2, 3);
  pass(0, 1) = 1.0;
  pass(1, 2) = 1.0;
  return stack_outputs(circuits, StateSpace::gain(pass, domain));
}

// Rows selecting the measured signals (V1, Vc, I1, Id).
void fill_measurement_rows(Matrix& map, Eigen::Index first_row) {
  map(first_row + 0, kV1) = 1.0;
  map(first_row + 1, kVc) = 1.0;
  map(first_row + 2, kI1) = 1.0;
  map(first_row + 3, kId) = 1.0;
}

StateSpace with_measurement_delays(const StateSpace& g, const PhilScenario& scenario, Eigen::Index n_z) {
  std::vector<StateSpace> blocks{identity_gain(n_z, g.domain())};
  for (std::size_t k : scenario.delays.meas_delay_steps) blocks.push_back(delay_block(k, scenario.sample_time));
  return series(g, diagonal(blocks));
}

const std::vector<std::string> kMeasurementNames{"y1:V1", "y2:Vc", "y3:I1", "y4:Id"};

}  // namespace

ScalingSpec ScalingSpec::identity() {
  ScalingSpec s;
  s.w_scale = 1.0;
  s.u_scales.fill(1.0);
  s.z_scales.fill(1.0);
  s.y_scales.fill(1.0);
  return s;
}

void ScalingSpec::validate() const {
  auto check = [](double v, const std::string& name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::ValidationError, name + " must be > 0");
  };
  check(w_scale, "scaling.w_scale");
  for (std::size_t i = 0; i < u_scales.size(); ++i) check(u_scales[i], "scaling.u_scales[" + std::to_string(i) + "]");
  for (std::size_t i = 0; i < z_scales.size(); ++i) check(z_scales[i], "scaling.z_scales[" + std::to_string(i) + "]");
  for (std::size_t i = 0; i < y_scales.size(); ++i) check(y_scales[i], "scaling.y_scales[" + std::to_string(i) + "]");
}

void WeightSpec::validate(double sample_time) const {
  require_cutoff(w_filter_hz, sample_time, "weights.w_filter_hz");
  for (double hz : error_filters_hz) require_cutoff(hz, sample_time, "weights.error_filters_hz");
  for (double hz : actuation_filters_hz) require_cutoff(hz, sample_time, "weights.actuation_filters_hz");
  if (!(noise_weight >= 0.0) || !std::isfinite(noise_weight)) {
    throw Error(ErrorCode::ValidationError, "weights.noise_weight must be >= 0");
  }
}

StateSpace lowpass_filter(double cutoff_hz, double sample_time) {
  require_cutoff(cutoff_hz, sample_time, "low-pass");
  const double c = 2.0 * std::numbers::pi * cutoff_hz;
  return bilinear(realize_tf({{c}, {1.0, c}, TimeDomain::continuous()}), sample_time);
}

StateSpace highpass_filter(double cutoff_hz, double sample_time) {
  require_cutoff(cutoff_hz, sample_time, "high-pass");
  const double c = 2.0 * std::numbers::pi * cutoff_hz;
  return bilinear(realize_tf({{1.0, 0.0}, {1.0, c}, TimeDomain::continuous()}), sample_time);
}

PartitionedPlant objective_plant(const PhilScenario& scenario, Objective objective) {
  const StateSpace core = core_interconnection(scenario);
  const Eigen::Index n_z = objective == Objective::Transparency ? 6 : 4;
  Matrix map = Matrix::Zero(n_z + 4, kSignalCount);
  std::vector<std::string> outputs;
  if (objective == Objective::Transparency) {
    map(0, kV1) = 1.0; map(0, kVref) = -1.0;
    map(1, kI1) = 1.0; map(1, kIref) = -1.0;
    map(2, kVc) = 1.0; map(2, kVref) = -1.0;
    map(3, kId) = 1.0; map(3, kIref) = -1.0;
    map(4, kV) = 1.0;
    map(5, kJB) = 1.0;
    outputs = {"z1:V1-Vref", "z2:I1-Iref", "z3:Vc-Vref", "z4:Id-Iref", "z5:V", "z6:JB"};
  } else {
    map(0, kV1) = 1.0; map(0, kVc) = -1.0;
    map(1, kI1) = 1.0; map(1, kId) = -1.0;
    map(2, kV) = 1.0;
    map(3, kJB) = 1.0;
    outputs = {"z1:V1-Vc", "z2:I1-Id", "z3:V", "z4:JB"};
  }
  fill_measurement_rows(map, n_z);
  outputs.insert(outputs.end(), kMeasurementNames.begin(), kMeasurementNames.end());

  const StateSpace mapped = series(core, StateSpace::gain(map, core.domain()));
  return PartitionedPlant(with_measurement_delays(mapped, scenario, n_z), 1, 2, n_z, 4,
                          {"w:Vgrid", "u1:V", "u2:JB"}, outputs);
}

PartitionedPlant apply_weights(const PartitionedPlant& plant, const WeightSpec& weights) {
  const StateSpace& sys = plant.sys();
  const double ts = sys.domain().sample_time();
  if (!sys.domain().is_discrete()) throw Error(ErrorCode::DomainMismatch, "weights apply to discrete plants");
  weights.validate(ts);
  if (plant.n_w() < 1 || (plant.n_z() != 6 && plant.n_z() != 4)) {
    throw Error(ErrorCode::DimensionMismatch, "apply_weights expects n_w >= 1 and n_z of 6 or 4");
  }
  const auto domain = sys.domain();

  std::vector<StateSpace> in{lowpass_filter(weights.w_filter_hz, ts)};
  if (sys.inputs() > 1) in.push_back(identity_gain(sys.inputs() - 1, domain));

  std::vector<StateSpace> out;
  const std::size_t errors = plant.n_z() == 6 ? 4 : 2;
  for (std::size_t i = 0; i < errors; ++i) out.push_back(lowpass_filter(weights.error_filters_hz[i], ts));
  for (double hz : weights.actuation_filters_hz) out.push_back(highpass_filter(hz, ts));
  out.push_back(identity_gain(plant.n_y(), domain));

  const StateSpace weighted = series(series(diagonal(in), sys), diagonal(out));
  return PartitionedPlant(weighted, plant.n_w(), plant.n_u(), plant.n_z(), plant.n_y(), plant.input_names(),
                          plant.output_names());
}

PartitionedPlant apply_scaling(const PartitionedPlant& plant, const ScalingSpec& scaling) {
  scaling.validate();
  if (plant.n_u() != 2 || plant.n_y() != 4 || plant.n_w() < 1 || (plant.n_z() != 6 && plant.n_z() != 4)) {
    throw Error(ErrorCode::DimensionMismatch, "apply_scaling expects the (w, 2 u, 6|4 z, 4 y) channel layout");
  }
  Vector in = Vector::Ones(plant.sys().inputs());
  in(0) = scaling.w_scale;
  in(plant.n_w()) = scaling.u_scales[0];
  in(plant.n_w() + 1) = scaling.u_scales[1];

  Vector out(plant.sys().outputs());
  if (plant.n_z() == 6) {
    for (Eigen::Index i = 0; i < 6; ++i) out(i) = scaling.z_scales[static_cast<std::size_t>(i)];
  } else {
    out << scaling.z_scales[0], scaling.z_scales[1], scaling.z_scales[4], scaling.z_scales[5], Vector::Zero(4);
  }
  for (Eigen::Index i = 0; i < 4; ++i) out(plant.n_z() + i) = scaling.y_scales[static_cast<std::size_t>(i)];

  return PartitionedPlant(scale(plant.sys(), out, in), plant.n_w(), plant.n_u(), plant.n_z(), plant.n_y(),
                          plant.input_names(), plant.output_names());
}

PartitionedPlant add_measurement_noise(const PartitionedPlant& plant, double weight) {
  const StateSpace& sys = plant.sys();
  const Eigen::Index n_w = plant.n_w(), n_v = plant.n_y(), n_u = plant.n_u();
  Matrix b(sys.states(), n_w + n_v + n_u);
  b << plant.b1(), Matrix::Zero(sys.states(), n_v), plant.b2();
  Matrix d = Matrix::Zero(sys.outputs(), n_w + n_v + n_u);
  d.leftCols(n_w) = sys.d().leftCols(n_w);
  d.rightCols(n_u) = sys.d().rightCols(n_u);
  d.bottomRows(n_v).middleCols(n_w, n_v) = weight * Matrix::Identity(n_v, n_v);

  std::vector<std::string> names = plant.input_names();
  if (!names.empty()) {
    std::vector<std::string> noise;
    for (Eigen::Index i = 0; i < n_v; ++i) noise.push_back("nu" + std::to_string(i + 1));
    names.insert(names.begin() + n_w, noise.begin(), noise.end());
  }
  return PartitionedPlant(StateSpace(sys.a(), std::move(b), sys.c(), std::move(d), sys.domain()), n_w + n_v, n_u,
                          plant.n_z(), plant.n_y(), std::move(names), plant.output_names());
}

PartitionedPlant assemble_plant(const PhilScenario& scenario, const ScalingSpec& scaling,
                                const WeightSpec& weights, Objective objective) {
  weights.validate(scenario.sample_time);
  PartitionedPlant plant = apply_scaling(apply_weights(objective_plant(scenario, objective), weights), scaling);
  if (weights.noise_weight > 0.0) plant = add_measurement_noise(plant, weights.noise_weight);
  return plant;
}

PartitionedPlant physical_interconnection(const PhilScenario& scenario) {
  const StateSpace core = core_interconnection(scenario);
  constexpr Eigen::Index n_z = 6;
  Matrix map = Matrix::Zero(n_z + 4, kSignalCount);
  map(0, kVref) = 1.0;
  map(1, kIref) = 1.0;
  map(2, kV1) = 1.0;
  map(3, kVc) = 1.0;
  map(4, kI1) = 1.0;
  map(5, kId) = 1.0;
  fill_measurement_rows(map, n_z);
  std::vector<std::string> outputs{"Vref", "Iref", "V1", "Vc", "I1", "Id"};
  outputs.insert(outputs.end(), kMeasurementNames.begin(), kMeasurementNames.end());
  const StateSpace mapped = series(core, StateSpace::gain(map, core.domain()));
  return PartitionedPlant(with_measurement_delays(mapped, scenario, n_z), 1, 2, n_z, 4,
                          {"w:Vgrid", "u1:V", "u2:JB"}, outputs);
}

}  // namespace phil
