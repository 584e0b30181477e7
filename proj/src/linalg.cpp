#include "phil/linalg.hpp"

#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Eigenvalues>

#include "phil/error.hpp"

namespace phil::linalg {

using CMat = Eigen::MatrixXcd;

Eigen::MatrixXd solve_sylvester(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                const Eigen::MatrixXd& c) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = b.rows();
  if (a.cols() != m || b.cols() != n || c.rows() != m || c.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "solve_sylvester: incompatible shapes");
  }
  if (m == 0 || n == 0) return Eigen::MatrixXd::Zero(m, n);

  // A = U S Uᴴ, B = V T Vᴴ with S, T upper triangular. Then S Y + Y T = Uᴴ C V.
  Eigen::ComplexSchur<CMat> schur_a(a.cast<std::complex<double>>());
  Eigen::ComplexSchur<CMat> schur_b(b.cast<std::complex<double>>());
  const CMat& u = schur_a.matrixU();
  const CMat& s = schur_a.matrixT();
  const CMat& v = schur_b.matrixU();
  const CMat& t = schur_b.matrixT();

  CMat f = u.adjoint() * c.cast<std::complex<double>>() * v;
  CMat y = CMat::Zero(m, n);
  const double scale = s.norm() + t.norm();
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXcd rhs = f.col(j);
    for (Eigen::Index k = 0; k < j; ++k) rhs -= y.col(k) * t(k, j);
    CMat lhs = s;
    lhs.diagonal().array() += t(j, j);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (std::abs(lhs(i, i)) <= 1e-14 * scale) {
        throw Error(ErrorCode::InvalidArgument, "solve_sylvester: A and -B share an eigenvalue");
      }
    }
    y.col(j) = lhs.triangularView<Eigen::Upper>().solve(rhs);
  }
  return (u * y * v.adjoint()).real();
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
  return symmetrize(solve_sylvester(a, a.transpose(), -q));
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrize(m));
  Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * lambda.asDiagonal();
}

Eigen::Index rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rel_tol * sv(0)) ++r;
  }
  return r;
}

}  // namespace phil::linalg
