#include <doctest.h>

#include <cmath>
#include <random>

#include "phil/riccati.hpp"

using namespace phil;

namespace {

Matrix one(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

TEST_CASE("scalar CARE has the positive root") {
  // x² + 2x − 1 = 0
  const CareSolution sol = solve_care(one(-1.0), one(1.0), one(1.0), one(1.0), one(0.0));
  CHECK(std::abs(sol.x(0, 0) - (std::sqrt(2.0) - 1.0)) < 1e-14);
  CHECK(sol.residual <= 1e-12);
}

TEST_CASE("zero cost on a Hurwitz matrix gives X = 0") {
  Matrix a(2, 2);
  a << -1, 2, 0, -3;
  const CareSolution sol = solve_care(a, Matrix::Identity(2, 2), Matrix::Zero(2, 2), Matrix::Identity(2, 2),
                                      Matrix::Zero(2, 2));
  CHECK(sol.x.norm() < 1e-14);
}

TEST_CASE("random instances: residual, symmetry and stabilization") {
  std::mt19937 rng(51);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rand = [&](int r, int c) {
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = u(rng);
    return m;
  };
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = 2.0 * rand(4, 4), b = rand(4, 2), cq = rand(3, 4);
    const Matrix q = cq.transpose() * cq + 0.1 * Matrix::Identity(4, 4);
    const Matrix rr = rand(2, 2);
    const Matrix r = rr * rr.transpose() + 0.5 * Matrix::Identity(2, 2);
    const Matrix s = 0.1 * rand(4, 2);
    const CareSolution sol = solve_care(a, b, q, r, s);
    CHECK(sol.residual <= 1e-8 * std::max(sol.x.norm(), q.norm()));
    CHECK(std::abs(care_residual(a, b, q, r, s, sol.x) - sol.residual) <= 1e-9 * sol.x.norm());
    CHECK((sol.x - sol.x.transpose()).norm() <= 1e-10 * sol.x.norm());
    const Matrix acl = a - b * r.inverse() * (b.transpose() * sol.x + s.transpose());
    const Eigen::VectorXcd ev = acl.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) CHECK(ev(i).real() < 0.0);
  }
}

TEST_CASE("indefinite R (H-infinity form)") {
  // Aᵀ X + X A − X (B2B2ᵀ − γ⁻² B1B1ᵀ) X + CᵀC = 0, written with R = diag(1, −γ²)
  Matrix a(2, 2), b(2, 2), c(1, 2);
  a << 0, 1, -2, -0.5;
  b << 0, 1, 1, 0;
  c << 1, 0;
  const double gamma = 5.0;
  Matrix r = Matrix::Zero(2, 2);
  r(0, 0) = 1.0;
  r(1, 1) = -gamma * gamma;
  const CareSolution sol = solve_care(a, b, c.transpose() * c, r, Matrix::Zero(2, 2));
  CHECK(sol.residual <= 1e-8 * std::max(1.0, sol.x.norm()));
  CHECK(sol.x.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("Hamiltonian with imaginary-axis eigenvalues is rejected") {
  // A = 0, B = 1, Q = −1, R = 1: H has eigenvalues ±j
  try {
    solve_care(one(0.0), one(1.0), one(-1.0), one(1.0), one(0.0));
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::NoStabilizingSolution || e.code() == ErrorCode::IterationDiverged));
  }
}
