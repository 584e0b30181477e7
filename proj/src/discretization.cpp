#include "phil/discretization.hpp"

#include <array>
#include <cmath>

namespace phil {

namespace {

void require_positive_ts(double ts) {
  if (!(ts > 0.0) || !std::isfinite(ts)) {
    throw Error(ErrorCode::InvalidArgument, "sample time must be positive and finite");
  }
}

// Coefficients of the [13/13] Padé approximant to exp (Higham 2005).
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};
constexpr double kTheta13 = 5.371920351148152;

}  // namespace

StateSpace bilinear(const StateSpace& g, double sample_time) {
  require_positive_ts(sample_time);
  if (!g.domain().is_continuous()) {
    throw Error(ErrorCode::DomainMismatch, "bilinear expects a continuous-time model");
  }
  const auto discrete = TimeDomain::discrete(sample_time);
  const Eigen::Index n = g.states();
  if (n == 0) return StateSpace::gain(g.d(), discrete);

  // W = (I − A Ts/2)⁻¹; Ad = W (I + A Ts/2), Bd = √Ts W B, Cd = √Ts C W, Dd = D + (Ts/2) C W B.
  const Matrix eye = Matrix::Identity(n, n);
  const Matrix lhs = eye - 0.5 * sample_time * g.a();
  Eigen::FullPivLU<Matrix> lu(lhs);
  if (!lu.isInvertible() || lu.rcond() < 1e-14) {
    throw Error(ErrorCode::SingularTransform, "I - (Ts/2)A is singular (pole at 2/Ts)");
  }
  const Matrix w = lu.inverse();
  const double root_ts = std::sqrt(sample_time);
  Matrix ad = w * (eye + 0.5 * sample_time * g.a());
  Matrix bd = root_ts * w * g.b();
  Matrix cd = root_ts * g.c() * w;
  Matrix dd = g.d() + 0.5 * sample_time * g.c() * w * g.b();
  return StateSpace(std::move(ad), std::move(bd), std::move(cd), std::move(dd), discrete);
}

StateSpace inverse_bilinear(const StateSpace& g, double sample_time) {
  require_positive_ts(sample_time);
  if (!g.domain().is_discrete()) {
    throw Error(ErrorCode::DomainMismatch, "inverse_bilinear expects a discrete-time model");
  }
  const auto continuous = TimeDomain::continuous();
  const Eigen::Index n = g.states();
  if (n == 0) return StateSpace::gain(g.d(), continuous);

  const Matrix eye = Matrix::Identity(n, n);
  Eigen::FullPivLU<Matrix> lu(eye + g.a());
  if (!lu.isInvertible() || lu.rcond() < 1e-14) {
    throw Error(ErrorCode::SingularTransform, "I + Ad is singular (pole at z = -1)");
  }
  const Matrix m = lu.inverse();
  const double root_ts = std::sqrt(sample_time);
  Matrix a = (2.0 / sample_time) * m * (g.a() - eye);
  Matrix b = (2.0 / root_ts) * m * g.b();
  Matrix c = (2.0 / root_ts) * g.c() * m;
  Matrix d = g.d() - g.c() * m * g.b();
  return StateSpace(std::move(a), std::move(b), std::move(c), std::move(d), continuous);
}

StateSpace zoh(const StateSpace& g, double sample_time) {
  require_positive_ts(sample_time);
  if (!g.domain().is_continuous()) {
    throw Error(ErrorCode::DomainMismatch, "zoh expects a continuous-time model");
  }
  const auto discrete = TimeDomain::discrete(sample_time);
  const Eigen::Index n = g.states();
  const Eigen::Index m = g.inputs();
  if (n == 0) return StateSpace::gain(g.d(), discrete);

  // exp([A B; 0 0]·Ts) = [Ad Bd; 0 I]
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = g.a() * sample_time;
  aug.topRightCorner(n, m) = g.b() * sample_time;
  const Matrix phi = matrix_exponential(aug);
  return StateSpace(phi.topLeftCorner(n, n), phi.topRightCorner(n, m), g.c(), g.d(), discrete);
}

Matrix matrix_exponential(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "matrix_exponential needs a square matrix");
  }
  const Eigen::Index n = m.rows();
  if (n == 0) return m;
  const Matrix eye = Matrix::Identity(n, n);

  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > kTheta13) {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / kTheta13))));
  }
  const Matrix a = m / std::ldexp(1.0, squarings);

  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const auto& b = kPade13;
  const Matrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
  const Matrix u = a * (u_inner + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * eye) / b[0];
  const Matrix v = (a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2) / b[0] + eye;

  Matrix result = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

}  // namespace phil
