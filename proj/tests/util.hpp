#pragma once

#include <complex>
#include <random>

#include "phil/lti.hpp"

namespace phil::test {

// Random stable realization: eigenvalues placed in (-5, -0.2) (continuous) or
// inside radius 0.9 (discrete) by a random similarity.
inline StateSpace random_stable(std::mt19937& rng, Eigen::Index n, Eigen::Index m, Eigen::Index p,
                                TimeDomain domain) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rand = [&](Eigen::Index r, Eigen::Index c) {
    Matrix x(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) x(i, j) = u(rng);
    return x;
  };
  Matrix lambda = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lambda(i, i) = domain.is_discrete() ? 0.9 * u(rng) : -2.6 + 2.4 * u(rng);
  }
  // a couple of complex pairs
  for (Eigen::Index i = 0; i + 1 < n; i += 3) {
    const double w = domain.is_discrete() ? 0.3 * u(rng) : 3.0 * u(rng);
    lambda(i, i + 1) = w;
    lambda(i + 1, i) = -w;
    lambda(i + 1, i + 1) = lambda(i, i);
    if (domain.is_discrete()) {
      const double r = std::hypot(lambda(i, i), w);
      if (r > 0.9) {
        lambda(i, i) *= 0.9 / r, lambda(i + 1, i + 1) *= 0.9 / r;
        lambda(i, i + 1) *= 0.9 / r, lambda(i + 1, i) *= 0.9 / r;
      }
    }
  }
  Matrix t = rand(n, n) + 3.0 * Matrix::Identity(n, n);
  Matrix a = t * lambda * t.inverse();
  return StateSpace(a, rand(n, m), rand(p, n), rand(p, m), domain);
}

inline std::complex<double> point_of(const TimeDomain& domain, double omega) {
  return domain.is_discrete() ? std::polar(1.0, omega) : std::complex<double>(0.0, omega);
}

inline double rel_err(const CMatrix& a, const CMatrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace phil::test
