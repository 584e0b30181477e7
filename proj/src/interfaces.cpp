#include "phil/interfaces.hpp"

namespace phil {

InterfaceAlgorithm itm_interface(double filter_cutoff_hz, double sample_time) {
  const StateSpace lp = lowpass_filter(filter_cutoff_hz, sample_time);
  Matrix b = Matrix::Zero(1, 4);
  b(0, 3) = lp.b()(0, 0);
  Matrix c = Matrix::Zero(2, 1);
  c(1, 0) = lp.c()(0, 0);
  Matrix d = Matrix::Zero(2, 4);
  d(0, 0) = 1.0;
  d(1, 3) = lp.d()(0, 0);
  InterfaceAlgorithm out;
  out.kind = InterfaceKind::ITM;
  out.filter_cutoff_hz = filter_cutoff_hz;
  out.realization = StateSpace(lp.a(), b, c, d, lp.domain());
  return out;
}

InterfaceAlgorithm wrap_scaled_controller(const ControllerRealization& k, const ScalingSpec& scaling) {
  const StateSpace& sys = k.sys;
  if (sys.inputs() != 4 || sys.outputs() != 2) {
    throw Error(ErrorCode::DimensionMismatch, "interface controller must have 4 inputs and 2 outputs");
  }
  Vector du(2), dy(4);
  du << scaling.u_scales[0], scaling.u_scales[1];
  dy << scaling.y_scales[0], scaling.y_scales[1], scaling.y_scales[2], scaling.y_scales[3];
  InterfaceAlgorithm out;
  out.kind = InterfaceKind::HInf;
  out.gamma_achieved = k.gamma_achieved;
  out.realization = scale(sys, du, dy);
  return out;
}

const char* to_string(InterfaceKind kind) { return kind == InterfaceKind::ITM ? "itm" : "hinf"; }

}  // namespace phil
