#pragma once

#include <Eigen/Dense>

namespace phil::linalg {

/// Solves A X + X B = C by complex Schur decomposition of both coefficients
/// (Bartels–Stewart). Throws if A and −B share an eigenvalue.
Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                const Eigen::MatrixXd& c);

/// Solves A X + X Aᵀ + Q = 0.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q);

/// Factor F with F Fᵀ = M for a symmetric positive semidefinite M
/// (negative eigenvalues from round-off are clamped to zero).
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& m);

/// Numerical rank by singular values relative to the largest one.
Eigen::Index rank(const Eigen::MatrixXd& m, double rel_tol = 1e-10);

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace phil::linalg
