#pragma once

#include "phil/lti.hpp"

namespace phil {

/// Tustin map s = (2/Ts)(z − 1)/(z + 1), no pre-warping.
StateSpace bilinear(const StateSpace& g, double sample_time);

/// Inverse Tustin map back to continuous time. Requires no pole at z = −1.
/// `sample_time` may differ from the model's own sample time: any positive
/// value gives a valid continuous surrogate (it only rescales frequency).
StateSpace inverse_bilinear(const StateSpace& g, double sample_time);

/// Zero-order-hold discretization (exact for piecewise-constant inputs).
StateSpace zoh(const StateSpace& g, double sample_time);

/// exp(M) by scaling and squaring with a degree-13 Padé approximant.
Matrix matrix_exponential(const Matrix& m);

}  // namespace phil
