#include "phil/hinf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "phil/discretization.hpp"
#include "phil/linalg.hpp"
#include "phil/riccati.hpp"

namespace phil {

namespace {

// Surrogate frequency scale: Ts = 2 maps the unit circle onto the imaginary
// axis with s = tan(θ/2), keeping the surrogate's eigenvalues O(1).
constexpr double kSurrogateTs = 2.0;

Matrix inverse_or_empty(const Matrix& m) {
  if (m.rows() == 0) return m;
  return m.fullPivLu().inverse();
}

// Continuous plant transformed so that D12 = [0; I] and D21 = [0 I].
struct NormalizedPlant {
  Matrix a, b1, b2, c1, c2, d11, d22;
  Eigen::Index m1 = 0, m2 = 0, p1 = 0, p2 = 0;
  Matrix ru_inv;  // u = ru_inv · ũ
  Matrix ry_inv;  // ỹ = ry_inv · y
};

NormalizedPlant normalize(const PartitionedPlant& plant) {
  NormalizedPlant n;
  n.m1 = plant.n_w();
  n.m2 = plant.n_u();
  n.p1 = plant.n_z();
  n.p2 = plant.n_y();
  const Matrix d12 = plant.d12();
  const Matrix d21 = plant.d21();

  if (n.p1 < n.m2) throw Error(ErrorCode::RankDeficientD12, "fewer performance outputs than actuators");
  Eigen::JacobiSVD<Matrix> svd12(d12, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector s12 = svd12.singularValues();
  if (n.m2 > 0 && !(s12(n.m2 - 1) > 1e-10 * std::max(1.0, s12(0)))) {
    throw Error(ErrorCode::RankDeficientD12, "D12 does not have full column rank");
  }
  if (n.m1 < n.p2) throw Error(ErrorCode::RankDeficientD21, "fewer exogenous inputs than measurements");
  Eigen::JacobiSVD<Matrix> svd21(d21, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector s21 = svd21.singularValues();
  if (n.p2 > 0 && !(s21(n.p2 - 1) > 1e-10 * std::max(1.0, s21(0)))) {
    throw Error(ErrorCode::RankDeficientD21, "D21 does not have full row rank");
  }

  // D12 = U1 Σ Vᵀ; Θz = [U2 U1] gives Θzᵀ D12 = [0; Σ Vᵀ].
  const Matrix& u12 = svd12.matrixU();
  Matrix theta_z(n.p1, n.p1);
  theta_z << u12.rightCols(n.p1 - n.m2), u12.leftCols(n.m2);
  n.ru_inv = svd12.matrixV() * s12.head(n.m2).cwiseInverse().asDiagonal();

  // D21 = U Σ V1ᵀ; Θw = [V2 V1] gives D21 Θw = [0 U Σ].
  const Matrix& v21 = svd21.matrixV();
  Matrix theta_w(n.m1, n.m1);
  theta_w << v21.rightCols(n.m1 - n.p2), v21.leftCols(n.p2);
  n.ry_inv = s21.head(n.p2).cwiseInverse().asDiagonal() * svd21.matrixU().transpose();

  n.a = plant.sys().a();
  n.b1 = plant.b1() * theta_w;
  n.b2 = plant.b2() * n.ru_inv;
  n.c1 = theta_z.transpose() * plant.c1();
  n.c2 = n.ry_inv * plant.c2();
  n.d11 = theta_z.transpose() * plant.d11() * theta_w;
  n.d22 = n.ry_inv * plant.d22() * n.ru_inv;
  return n;
}

struct RiccatiPair {
  Matrix x, y;
  double x_residual = 0.0, y_residual = 0.0;
};

// Feasibility of γ for the normalized plant (D22 treated as zero). Returns the
// Riccati pair when all conditions hold, otherwise records why not.
std::optional<RiccatiPair> test_gamma(const NormalizedPlant& p, double gamma, double riccati_tol, GammaTrial& trial) {
  trial.gamma = gamma;
  const Eigen::Index r1 = p.p1 - p.m2;
  const Eigen::Index c1 = p.m1 - p.p2;
  const double g2 = gamma * gamma;

  auto sigma_max = [](const Matrix& m) {
    return m.size() == 0 ? 0.0 : Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
  };
  const double d11_bound = std::max(sigma_max(p.d11.topRows(r1)), sigma_max(p.d11.leftCols(c1)));
  if (!(gamma > d11_bound * (1.0 + 1e-12))) {
    trial.reason = "gamma below the D11 feedthrough bound";
    return std::nullopt;
  }

  const Eigen::Index n = p.a.rows();
  Matrix d1dot(p.p1, p.m1 + p.m2);
  d1dot << p.d11, (Matrix(p.p1, p.m2) << Matrix::Zero(r1, p.m2), Matrix::Identity(p.m2, p.m2)).finished();
  Matrix ddot1(p.p1 + p.p2, p.m1);
  ddot1 << p.d11, Matrix::Zero(p.p2, c1), Matrix::Identity(p.p2, p.p2);
  Matrix b(n, p.m1 + p.m2);
  b << p.b1, p.b2;
  Matrix c(p.p1 + p.p2, n);
  c << p.c1, p.c2;

  Matrix r = d1dot.transpose() * d1dot;
  r.topLeftCorner(p.m1, p.m1).diagonal().array() -= g2;
  Matrix rt = ddot1 * ddot1.transpose();
  rt.topLeftCorner(p.p1, p.p1).diagonal().array() -= g2;

  RiccatiOptions opts;
  opts.residual_tol = riccati_tol;
  RiccatiPair pair;
  try {
    const CareSolution xs = solve_care(p.a, b, p.c1.transpose() * p.c1, r, p.c1.transpose() * d1dot, opts);
    pair.x = xs.x;
    pair.x_residual = xs.residual;
  } catch (const Error& e) {
    trial.reason = std::string("X Riccati: ") + e.what();
    return std::nullopt;
  }
  try {
    const CareSolution ys =
        solve_care(p.a.transpose(), c.transpose(), p.b1 * p.b1.transpose(), rt, p.b1 * ddot1.transpose(), opts);
    pair.y = ys.x;
    pair.y_residual = ys.residual;
  } catch (const Error& e) {
    trial.reason = std::string("Y Riccati: ") + e.what();
    return std::nullopt;
  }
  trial.x_residual = pair.x_residual;
  trial.y_residual = pair.y_residual;

  if (n > 0) {
    const double x_min = Eigen::SelfAdjointEigenSolver<Matrix>(pair.x).eigenvalues().minCoeff();
    const double y_min = Eigen::SelfAdjointEigenSolver<Matrix>(pair.y).eigenvalues().minCoeff();
    if (x_min < -1e-9 * std::max(1.0, pair.x.norm())) {
      trial.reason = "X is not positive semidefinite";
      return std::nullopt;
    }
    if (y_min < -1e-9 * std::max(1.0, pair.y.norm())) {
      trial.reason = "Y is not positive semidefinite";
      return std::nullopt;
    }
    const double rho = Eigen::EigenSolver<Matrix>(pair.x * pair.y, false).eigenvalues().cwiseAbs().maxCoeff();
    if (!(rho < g2)) {
      trial.reason = "spectral radius of XY exceeds gamma^2";
      return std::nullopt;
    }
  }
  trial.feasible = true;
  return pair;
}

// Central controller for the normalized plant with D22 = 0.
StateSpace central_controller(const NormalizedPlant& p, double gamma, const RiccatiPair& ric) {
  const Eigen::Index n = p.a.rows();
  const Eigen::Index r1 = p.p1 - p.m2;
  const Eigen::Index c1 = p.m1 - p.p2;
  const double g2 = gamma * gamma;

  const Matrix d1111 = p.d11.topLeftCorner(r1, c1);
  const Matrix d1112 = p.d11.topRightCorner(r1, p.p2);
  const Matrix d1121 = p.d11.bottomLeftCorner(p.m2, c1);
  const Matrix d1122 = p.d11.bottomRightCorner(p.m2, p.p2);

  Matrix d1dot(p.p1, p.m1 + p.m2);
  d1dot << p.d11, (Matrix(p.p1, p.m2) << Matrix::Zero(r1, p.m2), Matrix::Identity(p.m2, p.m2)).finished();
  Matrix ddot1(p.p1 + p.p2, p.m1);
  ddot1 << p.d11, Matrix::Zero(p.p2, c1), Matrix::Identity(p.p2, p.p2);
  Matrix b(n, p.m1 + p.m2);
  b << p.b1, p.b2;
  Matrix c(p.p1 + p.p2, n);
  c << p.c1, p.c2;
  Matrix r = d1dot.transpose() * d1dot;
  r.topLeftCorner(p.m1, p.m1).diagonal().array() -= g2;
  Matrix rt = ddot1 * ddot1.transpose();
  rt.topLeftCorner(p.p1, p.p1).diagonal().array() -= g2;

  const Matrix f = -r.fullPivLu().solve(d1dot.transpose() * p.c1 + b.transpose() * ric.x);
  const Matrix l = -(p.b1 * ddot1.transpose() + ric.y * c.transpose()) * rt.fullPivLu().inverse();
  const Matrix f12 = f.middleRows(c1, p.p2);
  const Matrix f2 = f.bottomRows(p.m2);
  const Matrix l12 = l.middleCols(r1, p.m2);
  const Matrix l2 = l.rightCols(p.p2);

  Matrix inner_r = g2 * Matrix::Identity(r1, r1) - d1111 * d1111.transpose();
  Matrix inner_c = g2 * Matrix::Identity(c1, c1) - d1111.transpose() * d1111;
  const Matrix inner_r_inv = inverse_or_empty(inner_r);
  const Matrix inner_c_inv = inverse_or_empty(inner_c);

  const Matrix dk11 = -d1121 * d1111.transpose() * inner_r_inv * d1112 - d1122;
  const Matrix m12 = Matrix::Identity(p.m2, p.m2) - d1121 * inner_c_inv * d1121.transpose();
  const Matrix m21 = Matrix::Identity(p.p2, p.p2) - d1112.transpose() * inner_r_inv * d1112;
  Eigen::LLT<Matrix> chol12(linalg::symmetrize(m12));
  Eigen::LLT<Matrix> chol21(linalg::symmetrize(m21));
  if (chol12.info() != Eigen::Success || chol21.info() != Eigen::Success) {
    throw Error(ErrorCode::GammaInfeasible, "central controller feedthrough factors are not positive definite");
  }
  const Matrix dk12 = chol12.matrixL();
  const Matrix dk21 = chol21.matrixU();
  const Matrix dk12_inv = dk12.inverse();
  const Matrix dk21_inv = dk21.inverse();

  const Matrix z = (Matrix::Identity(n, n) - ric.y * ric.x / g2).fullPivLu().inverse();
  const Matrix bk2 = z * (p.b2 + l12) * dk12;
  const Matrix ck2 = -dk21 * (p.c2 + f12);
  const Matrix bk1 = -z * l2 + bk2 * dk12_inv * dk11;
  const Matrix ck1 = f2 + dk11 * dk21_inv * ck2;
  const Matrix ak = p.a + b * f + bk1 * dk21_inv * ck2;
  return StateSpace(ak, bk1, ck1, dk11, TimeDomain::continuous());
}

// Undoes D22 removal and the channel normalization: returns K for the
// original continuous surrogate.
StateSpace restore_controller(const NormalizedPlant& p, const StateSpace& k0) {
  const Eigen::Index nu = p.m2;
  const Matrix& d22 = p.d22;
  Eigen::FullPivLU<Matrix> loop(Matrix::Identity(nu, nu) + k0.d() * d22);
  if (!loop.isInvertible()) throw Error(ErrorCode::AlgebraicLoop, "controller feedthrough makes I + DK·D22 singular");
  const Matrix m = loop.inverse();
  const Matrix a = k0.a() - k0.b() * d22 * m * k0.c();
  const Matrix b = k0.b() * (Matrix::Identity(p.p2, p.p2) - d22 * m * k0.d());
  const Matrix c = m * k0.c();
  const Matrix d = m * k0.d();
  return StateSpace(a, b * p.ry_inv, p.ru_inv * c, p.ru_inv * d * p.ry_inv, TimeDomain::continuous());
}

bool control_irrelevant(const PartitionedPlant& plant) {
  const Matrix b2 = plant.b2();
  const Matrix c1 = plant.c1();
  const double scale = std::max(1.0, plant.sys().d().norm());
  if (plant.d12().norm() > 1e-12 * scale) return false;
  Matrix ak_b2 = b2;
  const double ref = std::max(1e-300, c1.norm() * b2.norm());
  for (Eigen::Index k = 0; k < plant.sys().states(); ++k) {
    if ((c1 * ak_b2).norm() > 1e-12 * ref * std::max(1.0, ak_b2.norm() / std::max(b2.norm(), 1e-300))) return false;
    ak_b2 = plant.sys().a() * ak_b2;
  }
  return true;
}

bool unstable_mode(std::complex<double> lambda, bool discrete) {
  return discrete ? std::abs(lambda) >= 1.0 - kDefaultStabilityMargin : lambda.real() >= -kDefaultStabilityMargin;
}

void check_stabilizable_detectable(const PartitionedPlant& plant) {
  const StateSpace& sys = plant.sys();
  const Eigen::Index n = sys.states();
  if (n == 0) return;
  const Eigen::VectorXcd lambda = poles(sys);
  const CMatrix a = sys.a().cast<std::complex<double>>();
  const CMatrix b2 = plant.b2().cast<std::complex<double>>();
  const CMatrix c2 = plant.c2().cast<std::complex<double>>();
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (!unstable_mode(lambda(i), sys.domain().is_discrete())) continue;
    CMatrix shifted = a - lambda(i) * CMatrix::Identity(n, n);
    CMatrix ctrb(n, n + b2.cols());
    ctrb << shifted, b2;
    CMatrix obsv(n + c2.rows(), n);
    obsv << shifted, c2;
    Eigen::JacobiSVD<CMatrix> sc(ctrb), so(obsv);
    const double tol = 1e-9 * std::max(1.0, a.norm());
    if (sc.singularValues()(n - 1) <= tol) {
      throw Error(ErrorCode::NotStabilizable, "(A, B2) has an uncontrollable unstable mode");
    }
    if (so.singularValues()(n - 1) <= tol) {
      throw Error(ErrorCode::NotDetectable, "(C2, A) has an unobservable unstable mode");
    }
  }
}

}  // namespace

void SynthesisOptions::validate() const {
  if (!(gamma_lo > 0.0) || !(gamma_hi > gamma_lo)) {
    throw Error(ErrorCode::ValidationError, "synthesis needs 0 < gamma_lo < gamma_hi");
  }
  if (!(gamma_rel_tol > 0.0) || !(riccati_tol > 0.0) || max_iters <= 0 || bracket_expansions < 0 ||
      !(suboptimality >= 0.0)) {
    throw Error(ErrorCode::ValidationError, "synthesis tolerances and iteration limits must be positive");
  }
}

ControllerRealization synthesize(const PartitionedPlant& plant, const SynthesisOptions& options) {
  options.validate();
  const StateSpace& sys = plant.sys();
  const TimeDomain domain = sys.domain();
  if (!domain.is_discrete()) throw Error(ErrorCode::DomainMismatch, "synthesize expects a discrete plant");

  if (control_irrelevant(plant) && is_stable(sys)) {
    SynthesisReport report;
    report.control_irrelevant = true;
    const StateSpace k = StateSpace::gain(Matrix::Zero(plant.n_u(), plant.n_y()), domain);
    const double gamma = hinf_norm(lft_lower(plant, k));
    report.gamma_feasible = gamma;
    report.closed_loop_norm = gamma;
    return ControllerRealization{k, gamma, report};
  }

  check_stabilizable_detectable(plant);
  const StateSpace surrogate = balance(inverse_bilinear(sys, kSurrogateTs));
  const NormalizedPlant normalized =
      normalize(PartitionedPlant(surrogate, plant.n_w(), plant.n_u(), plant.n_z(), plant.n_y()));

  SynthesisReport report;
  auto trial_at = [&](double gamma) {
    GammaTrial trial;
    auto pair = test_gamma(normalized, gamma, options.riccati_tol, trial);
    report.trials.push_back(trial);
    return pair;
  };

  double lo = options.gamma_lo;
  double hi = options.gamma_hi;
  int iterations = 0;
  bool lo_infeasible_known = false;
  for (int expansion = 0; !trial_at(hi); ++expansion) {
    if (expansion >= options.bracket_expansions) {
      throw Error(ErrorCode::GammaInfeasible, "no gamma up to " + std::to_string(hi) + " is achievable");
    }
    lo = hi;
    lo_infeasible_known = true;
    hi *= 10.0;
  }
  if (!lo_infeasible_known) {
    for (int expansion = 0; trial_at(lo); ++expansion) {
      hi = lo;
      if (expansion >= options.bracket_expansions) break;
      lo /= 10.0;
    }
  }
  while (hi / lo - 1.0 > options.gamma_rel_tol && iterations < options.max_iters && lo < hi) {
    const double mid = std::sqrt(lo * hi);
    if (trial_at(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
    ++iterations;
  }
  report.gamma_infeasible = lo < hi ? lo : 0.0;

  // Build and verify the central controller, backing off γ slightly if the
  // construction is numerically poor this close to the optimum.
  constexpr int kMaxBackoffs = 25;
  for (int backoff = 0; backoff <= kMaxBackoffs; ++backoff) {
    const double gamma = hi * (1.0 + options.suboptimality) * std::pow(1.0 + 2.0 * options.gamma_rel_tol, backoff);
    GammaTrial trial;
    const auto pair = test_gamma(normalized, gamma, options.riccati_tol, trial);
    if (!pair) continue;
    try {
      const StateSpace k0 = central_controller(normalized, gamma, *pair);
      const StateSpace kc = restore_controller(normalized, k0);
      const StateSpace kd_unit = bilinear(kc, kSurrogateTs);
      StateSpace kd(kd_unit.a(), kd_unit.b(), kd_unit.c(), kd_unit.d(), domain);
      const StateSpace closed = lft_lower(plant, kd);
      if (!is_stable(closed)) continue;
      const double norm = hinf_norm(closed);
      if (!(norm <= gamma * (1.0 + options.gamma_rel_tol))) continue;
      report.gamma_feasible = gamma;
      report.x_residual = pair->x_residual;
      report.y_residual = pair->y_residual;
      report.closed_loop_norm = norm;
      report.backoffs = backoff;
      return ControllerRealization{std::move(kd), gamma, std::move(report)};
    } catch (const Error&) {
      continue;
    }
  }
  throw Error(ErrorCode::RiccatiDivergence, "could not construct a verified controller near gamma = " +
                                                std::to_string(hi));
}

ValidationReport validate_closed_loop(const PartitionedPlant& plant, const StateSpace& controller, double f_max_hz,
                                      int grid_points) {
  if (!(f_max_hz > 0.0) || grid_points < 2) {
    throw Error(ErrorCode::InvalidArgument, "validation needs f_max > 0 and at least two grid points");
  }
  const StateSpace closed = lft_lower(plant, controller);
  ValidationReport report;
  report.stable = is_stable(closed);
  if (!report.stable) return report;
  report.hinf_norm = hinf_norm(closed);

  const bool discrete = closed.domain().is_discrete();
  const double ts = closed.domain().sample_time();
  double f_top = f_max_hz;
  if (discrete) f_top = std::min(f_top, 0.5 / ts);
  const double f_bottom = std::min(0.1, f_top / 10.0);
  report.frequencies_hz.push_back(0.0);
  const double step = std::log(f_top / f_bottom) / (grid_points - 1);
  for (int i = 0; i < grid_points; ++i) report.frequencies_hz.push_back(f_bottom * std::exp(step * i));
  report.frequencies_hz.back() = f_top;

  const Eigen::Index nz = plant.n_z(), nw = plant.n_w();
  report.gains_db.assign(static_cast<std::size_t>(nz * nw), std::vector<double>(report.frequencies_hz.size()));
  for (std::size_t k = 0; k < report.frequencies_hz.size(); ++k) {
    const double omega = 2.0 * std::numbers::pi * report.frequencies_hz[k] * (discrete ? ts : 1.0);
    const CMatrix t = freq_response(closed, omega);
    for (Eigen::Index i = 0; i < nz; ++i) {
      for (Eigen::Index j = 0; j < nw; ++j) {
        const double mag = std::abs(t(i, j));
        report.gains_db[static_cast<std::size_t>(i * nw + j)][k] =
            mag > 0.0 ? 20.0 * std::log10(mag) : -std::numeric_limits<double>::infinity();
      }
    }
  }

  auto name = [](const std::vector<std::string>& names, Eigen::Index i, const char* prefix) {
    return i < static_cast<Eigen::Index>(names.size()) ? names[static_cast<std::size_t>(i)]
                                                       : prefix + std::to_string(i + 1);
  };
  report.pass = true;
  for (Eigen::Index i = 0; i < nz; ++i) {
    for (Eigen::Index j = 0; j < nw; ++j) {
      const auto& g = report.gains_db[static_cast<std::size_t>(i * nw + j)];
      const auto it = std::max_element(g.begin(), g.end());
      ChannelGain ch{name(plant.input_names(), j, "w"), name(plant.output_names(), i, "z"), *it,
                     report.frequencies_hz[static_cast<std::size_t>(it - g.begin())]};
      if (!(ch.max_gain_db < 0.0)) report.pass = false;
      if (!report.worst || ch.max_gain_db > report.worst->max_gain_db) report.worst = ch;
      report.channels.push_back(std::move(ch));
    }
  }
  return report;
}

ValidationReport validate_closed_loop(const PartitionedPlant& plant, const ControllerRealization& controller,
                                      double f_max_hz, int grid_points) {
  return validate_closed_loop(plant, controller.sys, f_max_hz, grid_points);
}

}  // namespace phil
