#pragma once

#include "phil/lti.hpp"

namespace phil {

struct RiccatiOptions {
  double sign_tol = 1e-12;
  int max_sign_iters = 100;
  /// Accept when ‖residual‖_F ≤ residual_tol · max(‖X‖_F, ‖Q‖_F).
  double residual_tol = 1e-8;
  int newton_steps = 1;
};

struct CareSolution {
  Matrix x;
  double residual = 0.0;
  int sign_iterations = 0;
};

/// Stabilizing solution of
///   AᵀX + XA − (XB + S) R⁻¹ (BᵀX + Sᵀ) + Q = 0,
/// with R symmetric and invertible but not necessarily definite (the H∞
/// Riccati equations have indefinite R). The stable invariant subspace of the
/// Hamiltonian is found with the Newton iteration for the matrix sign
/// function; the result is then polished by Newton defect correction.
CareSolution solve_care(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r, const Matrix& s,
                        const RiccatiOptions& options = {});

/// ‖AᵀX + XA − (XB + S) R⁻¹ (BᵀX + Sᵀ) + Q‖_F
double care_residual(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r, const Matrix& s,
                     const Matrix& x);

}  // namespace phil
