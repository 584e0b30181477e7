#include "phil/riccati.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "phil/linalg.hpp"

namespace phil {

namespace {

Matrix invert_weight(const Matrix& r) {
  Eigen::FullPivLU<Matrix> lu(linalg::symmetrize(r));
  if (!lu.isInvertible() || lu.rcond() < 1e-14) {
    throw Error(ErrorCode::InvalidArgument, "solve_care: R is singular");
  }
  return lu.inverse();
}

Matrix riccati_residual(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r_inv, const Matrix& s,
                        const Matrix& x) {
  const Matrix xbs = x * b + s;
  return a.transpose() * x + x * a - xbs * r_inv * xbs.transpose() + q;
}

// sign(H) by the scaled Newton iteration Z ← (cZ + (cZ)⁻¹)/2.
Matrix matrix_sign(const Matrix& h, const RiccatiOptions& options, int& iterations) {
  const Eigen::Index n = h.rows();
  Matrix z = h;
  bool scaling = true;
  for (iterations = 1; iterations <= options.max_sign_iters; ++iterations) {
    Eigen::PartialPivLU<Matrix> lu(z);
    if (!(lu.rcond() > 0.0)) {
      throw Error(ErrorCode::NoStabilizingSolution, "Hamiltonian has eigenvalues on the imaginary axis");
    }
    const Matrix z_inv = lu.inverse();
    double c = 1.0;
    if (scaling) {
      double log_det = 0.0;
      const Matrix& lu_mat = lu.matrixLU();
      for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(std::abs(lu_mat(i, i)));
      c = std::exp(-log_det / static_cast<double>(n));
      if (!std::isfinite(c) || c <= 0.0) c = 1.0;
    }
    const Matrix next = 0.5 * (c * z + z_inv / c);
    const double change = (next - z).lpNorm<1>();
    const double size = next.lpNorm<1>();
    z = next;
    if (!z.allFinite()) break;
    if (change <= 1e-2 * size) scaling = false;
    if (change <= options.sign_tol * size) return z;
  }
  throw Error(ErrorCode::IterationDiverged, "matrix sign iteration did not converge");
}

}  // namespace

double care_residual(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r, const Matrix& s,
                     const Matrix& x) {
  return riccati_residual(a, b, q, invert_weight(r), s, x).norm();
}

CareSolution solve_care(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r, const Matrix& s,
                        const RiccatiOptions& options) {
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  if (a.cols() != n || b.rows() != n || q.rows() != n || q.cols() != n || r.rows() != m || r.cols() != m ||
      s.rows() != n || s.cols() != m) {
    throw Error(ErrorCode::DimensionMismatch, "solve_care: incompatible matrix shapes");
  }
  CareSolution out;
  if (n == 0) {
    out.x = Matrix(0, 0);
    return out;
  }
  const Matrix r_inv = invert_weight(r);
  const Matrix a_bar = a - b * r_inv * s.transpose();
  const Matrix g = linalg::symmetrize(b * r_inv * b.transpose());
  const Matrix q_bar = linalg::symmetrize(q - s * r_inv * s.transpose());

  // X = β X̃ with β = sqrt(‖Q̄‖/‖G‖) balances the off-diagonal blocks.
  const double g_norm = g.norm(), q_norm = q_bar.norm();
  const double beta = g_norm > 0.0 && q_norm > 0.0 ? std::sqrt(q_norm / g_norm) : 1.0;
  Matrix h(2 * n, 2 * n);
  h << a_bar, -beta * g, -q_bar / beta, -a_bar.transpose();

  // Scale the Hamiltonian so its entries are O(1); sign(αH) = sign(H) for α > 0.
  const double h_norm = h.lpNorm<1>();
  const Matrix w = matrix_sign(h / (h_norm > 0.0 ? h_norm : 1.0), options, out.sign_iterations);

  // sign(H)·[I; X] = −[I; X]  ⇒  [W12; W22 + I] X = −[W11 + I; W21]
  Matrix lhs(2 * n, n), rhs(2 * n, n);
  lhs << w.topRightCorner(n, n), w.bottomRightCorner(n, n) + Matrix::Identity(n, n);
  rhs << w.topLeftCorner(n, n) + Matrix::Identity(n, n), w.bottomLeftCorner(n, n);
  rhs = -rhs;
  Eigen::ColPivHouseholderQR<Matrix> qr(lhs);
  qr.setThreshold(1e-10);
  if (qr.rank() < n) {
    throw Error(ErrorCode::NoStabilizingSolution, "stable invariant subspace is not a graph over [I; X]");
  }
  Matrix x = linalg::symmetrize(beta * qr.solve(rhs));

  // Newton defect correction: (A − B K)ᵀ Δ + Δ (A − B K) = −Res(X).
  double residual = riccati_residual(a, b, q, r_inv, s, x).norm();
  for (int step = 0; step < options.newton_steps + 4; ++step) {
    if (step >= options.newton_steps && residual <= options.residual_tol * x.norm()) break;
    const Matrix k = r_inv * (b.transpose() * x + s.transpose());
    const Matrix closed = a - b * k;
    const Matrix res = riccati_residual(a, b, q, r_inv, s, x);
    Matrix delta;
    try {
      delta = linalg::solve_lyapunov(closed.transpose(), res);
    } catch (const Error&) {
      break;
    }
    const Matrix candidate = linalg::symmetrize(x + delta);
    const double candidate_residual = riccati_residual(a, b, q, r_inv, s, candidate).norm();
    if (!(candidate_residual < residual)) break;
    x = candidate;
    residual = candidate_residual;
  }
  out.x = x;
  out.residual = residual;

  if (!x.allFinite()) throw Error(ErrorCode::NoStabilizingSolution, "Riccati solution is not finite");
  const Matrix closed = a - b * r_inv * (b.transpose() * x + s.transpose());
  Eigen::EigenSolver<Matrix> eig(closed, false);
  if (eig.eigenvalues().real().maxCoeff() >= 0.0) {
    throw Error(ErrorCode::NoStabilizingSolution, "Riccati closed loop is not Hurwitz");
  }
  if (residual > options.residual_tol * std::max(x.norm(), q.norm())) {
    throw Error(ErrorCode::RiccatiDivergence, "Riccati residual " + std::to_string(residual) +
                                                  " exceeds tolerance relative to max(||X||, ||Q||), ||X|| = " +
                                                  std::to_string(x.norm()));
  }
  return out;
}

}  // namespace phil
