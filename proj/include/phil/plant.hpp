#pragma once

#include <array>
#include <cmath>

#include "phil/circuits.hpp"
#include "phil/lti.hpp"

namespace phil {

enum class Objective { Transparency, Accuracy };

/// Channel normalizations. Inputs are multiplied by their physical maximum,
/// outputs by the reciprocal of their allowed/expected magnitude.
struct ScalingSpec {
  double w_scale = 120.0 * std::sqrt(2.0);
  std::array<double, 2> u_scales{200.0, 15.0};
  /// Order: V1−V_ref, I1−I_ref, Vc−V_ref, Id−I_ref, V, J_B. The accuracy
  /// objective reuses entries 0, 1, 4, 5 for V1−Vc, I1−Id, V, J_B.
  std::array<double, 6> z_scales{1.0 / 6.0, 1.0 / 0.5, 1.0 / 6.0, 1.0 / 0.5, 1.0 / 200.0, 1.0 / 15.0};
  /// Order: V1, Vc, I1, Id.
  std::array<double, 4> y_scales{1.0 / 120.0, 1.0 / 120.0, 1.0 / 10.0, 1.0 / 10.0};

  static ScalingSpec identity();
  void validate() const;
};

/// Loop-shaping filters (first-order prototypes, bilinear-discretized) and the
/// fictitious measurement-noise weight that makes D21 full row rank.
struct WeightSpec {
  double w_filter_hz = 1000.0;
  std::array<double, 4> error_filters_hz{1000.0, 1000.0, 1000.0, 1000.0};
  std::array<double, 2> actuation_filters_hz{1000.0, 1000.0};
  /// Zero disables the noise channels entirely.
  double noise_weight = 1e-4;

  void validate(double sample_time) const;
};

/// First-order low-pass c/(s+c) and high-pass s/(s+c), bilinear-discretized.
StateSpace lowpass_filter(double cutoff_hz, double sample_time);
StateSpace highpass_filter(double cutoff_hz, double sample_time);

/// Unscaled, unweighted model-matching plant: w = V_grid, u = (V, J_B),
/// z per objective, y = delayed (V1, Vc, I1, Id).
PartitionedPlant objective_plant(const PhilScenario& scenario, Objective objective);

/// Low-pass on w and on the error channels of z; high-pass on the actuation
/// channels of z. The objective is inferred from n_z (6 or 4).
PartitionedPlant apply_weights(const PartitionedPlant& plant, const WeightSpec& weights);

/// Scales w by w_scale, u by u_scales, z by z_scales, y by y_scales.
/// Extra w channels beyond the first (noise inputs) are left unscaled.
PartitionedPlant apply_scaling(const PartitionedPlant& plant, const ScalingSpec& scaling);

/// Appends n_y noise inputs entering y with gain `weight` (no effect on z).
PartitionedPlant add_measurement_noise(const PartitionedPlant& plant, double weight);

/// The synthesis-ready generalized plant.
PartitionedPlant assemble_plant(const PhilScenario& scenario, const ScalingSpec& scaling,
                                const WeightSpec& weights, Objective objective);

/// Physical-units plant used for simulation: w = V_grid, u = (V, J_B),
/// z = (V_ref, I_ref, V1, Vc, I1, Id) undelayed monitors, y = delayed
/// (V1, Vc, I1, Id).
PartitionedPlant physical_interconnection(const PhilScenario& scenario);

}  // namespace phil
