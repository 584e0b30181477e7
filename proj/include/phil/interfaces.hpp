#pragma once

#include <optional>

#include "phil/hinf.hpp"
#include "phil/plant.hpp"

namespace phil {

enum class InterfaceKind { ITM, HInf };

/// A discrete interface controller acting on physical signals:
/// inputs y = (V1, Vc, I1, Id), outputs u = (V, J_B).
struct InterfaceAlgorithm {
  InterfaceKind kind = InterfaceKind::ITM;
  double filter_cutoff_hz = 0.0;        // ITM only
  std::optional<double> gamma_achieved;  // HInf only
  StateSpace realization = StateSpace::gain(Matrix::Zero(2, 4), TimeDomain::discrete(1.0));
};

/// V = V1, J_B = low-pass(Id); one state.
InterfaceAlgorithm itm_interface(double filter_cutoff_hz, double sample_time);

/// Physical controller D_u · K · D_y from a controller synthesized on the
/// scaled plant.
InterfaceAlgorithm wrap_scaled_controller(const ControllerRealization& k, const ScalingSpec& scaling);

const char* to_string(InterfaceKind kind);

}  // namespace phil
