#include "phil/lti.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "phil/discretization.hpp"
#include "phil/linalg.hpp"

namespace phil {

namespace {

using Complex = std::complex<double>;

void require_same_domain(const StateSpace& g1, const StateSpace& g2, const char* op) {
  if (!(g1.domain() == g2.domain())) {
    throw Error(ErrorCode::DomainMismatch, std::string(op) + ": operands live in different time domains");
  }
}

// Diagonal similarity with powers of two that equalizes row and column norms of A
// (Parlett–Reinsch). Exact in floating point; leaves the transfer function unchanged.
// Only the leading `free` indices are scaled; the rest stay fixed.
Vector balancing_scales(const Matrix& a, Eigen::Index free = -1) {
  const Eigen::Index n = a.rows();
  if (free < 0) free = n;
  Vector d = Vector::Ones(n);
  Matrix work = a;
  bool converged = false;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    converged = true;
    for (Eigen::Index i = 0; i < free; ++i) {
      double col = 0.0, row = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        col += std::abs(work(j, i));
        row += std::abs(work(i, j));
      }
      if (col == 0.0 || row == 0.0) continue;
      double f = 1.0;
      const double s = col + row;
      while (col < row / 2.0) { col *= 2.0; row /= 2.0; f *= 2.0; }
      while (col >= row * 2.0) { col /= 2.0; row *= 2.0; f /= 2.0; }
      if (col + row < 0.95 * s) {
        converged = false;
        d(i) *= f;
        work.row(i) /= f;
        work.col(i) *= f;
      }
    }
  }
  return d;
}

}  // namespace

TimeDomain TimeDomain::discrete(double sample_time) {
  if (!(sample_time > 0.0) || !std::isfinite(sample_time)) {
    throw Error(ErrorCode::InvalidArgument, "discrete sample time must be positive");
  }
  return TimeDomain(sample_time);
}

std::complex<double> TransferFunction::evaluate(std::complex<double> x) const {
  auto horner = [x](const std::vector<double>& p) {
    Complex acc = 0.0;
    for (double c : p) acc = acc * x + c;
    return acc;
  };
  return horner(numerator) / horner(denominator);
}

StateSpace::StateSpace(Matrix a, Matrix b, Matrix c, Matrix d, TimeDomain domain)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)), domain_(domain) {
  const Eigen::Index n = a_.rows();
  if (a_.cols() != n || b_.rows() != n || c_.cols() != n || d_.rows() != c_.rows() ||
      d_.cols() != b_.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "state-space matrices have inconsistent shapes (A " + std::to_string(a_.rows()) + "x" +
                    std::to_string(a_.cols()) + ", B " + std::to_string(b_.rows()) + "x" +
                    std::to_string(b_.cols()) + ", C " + std::to_string(c_.rows()) + "x" +
                    std::to_string(c_.cols()) + ", D " + std::to_string(d_.rows()) + "x" +
                    std::to_string(d_.cols()) + ")");
  }
}

StateSpace StateSpace::gain(Matrix d, TimeDomain domain) {
  const Eigen::Index p = d.rows();
  const Eigen::Index m = d.cols();
  return StateSpace(Matrix(0, 0), Matrix(0, m), Matrix(p, 0), std::move(d), domain);
}

PartitionedPlant::PartitionedPlant(StateSpace sys, Eigen::Index n_w, Eigen::Index n_u, Eigen::Index n_z,
                                   Eigen::Index n_y, std::vector<std::string> input_names,
                                   std::vector<std::string> output_names)
    : sys_(std::move(sys)),
      n_w_(n_w),
      n_u_(n_u),
      n_z_(n_z),
      n_y_(n_y),
      input_names_(std::move(input_names)),
      output_names_(std::move(output_names)) {
  if (n_w < 0 || n_u < 0 || n_z < 0 || n_y < 0 || n_w + n_u != sys_.inputs() ||
      n_z + n_y != sys_.outputs()) {
    throw Error(ErrorCode::DimensionMismatch, "partition sizes do not add up to the system's ports");
  }
  if (!input_names_.empty() && static_cast<Eigen::Index>(input_names_.size()) != sys_.inputs()) {
    throw Error(ErrorCode::DimensionMismatch, "one input name per input channel required");
  }
  if (!output_names_.empty() && static_cast<Eigen::Index>(output_names_.size()) != sys_.outputs()) {
    throw Error(ErrorCode::DimensionMismatch, "one output name per output channel required");
  }
}

StateSpace realize_tf(const TransferFunction& tf) {
  if (tf.denominator.empty() || tf.denominator.front() == 0.0) {
    throw Error(ErrorCode::DegenerateDenominator, "denominator leading coefficient is zero");
  }
  std::vector<double> num = tf.numerator;
  while (num.size() > 1 && num.front() == 0.0) num.erase(num.begin());
  if (num.empty()) num.push_back(0.0);
  const std::size_t n = tf.denominator.size() - 1;
  if (num.size() - 1 > n) throw Error(ErrorCode::NonProper, "numerator degree exceeds denominator degree");

  const double lead = tf.denominator.front();
  std::vector<double> den(tf.denominator.size());
  std::transform(tf.denominator.begin(), tf.denominator.end(), den.begin(), [lead](double v) { return v / lead; });
  std::vector<double> padded(n + 1, 0.0);
  std::copy(num.begin(), num.end(), padded.begin() + static_cast<std::ptrdiff_t>(n + 1 - num.size()));
  for (double& v : padded) v /= lead;

  const auto ni = static_cast<Eigen::Index>(n);
  Matrix d(1, 1);
  d(0, 0) = padded[0];
  if (n == 0) return StateSpace::gain(d, tf.domain);

  // Controllable canonical form.
  Matrix a = Matrix::Zero(ni, ni);
  Matrix b = Matrix::Zero(ni, 1);
  Matrix c(1, ni);
  for (Eigen::Index i = 0; i < ni; ++i) {
    a(0, i) = -den[static_cast<std::size_t>(i) + 1];
    c(0, i) = padded[static_cast<std::size_t>(i) + 1] - padded[0] * den[static_cast<std::size_t>(i) + 1];
  }
  for (Eigen::Index i = 1; i < ni; ++i) a(i, i - 1) = 1.0;
  b(0, 0) = 1.0;

  // Balance the whole system matrix [A B; C D] over the state indices.
  Matrix sys(ni + 1, ni + 1);
  sys << a, b, c, d;
  const Vector s = balancing_scales(sys, ni).head(ni);
  a = s.cwiseInverse().asDiagonal() * a * s.asDiagonal();
  b = s.cwiseInverse().asDiagonal() * b;
  c = c * s.asDiagonal();
  return StateSpace(std::move(a), std::move(b), std::move(c), std::move(d), tf.domain);
}

StateSpace series(const StateSpace& g1, const StateSpace& g2) {
  require_same_domain(g1, g2, "series");
  if (g1.outputs() != g2.inputs()) {
    throw Error(ErrorCode::DimensionMismatch, "series: outputs of the first system must feed the second");
  }
  const Eigen::Index n1 = g1.states(), n2 = g2.states();
  Matrix a = Matrix::Zero(n1 + n2, n1 + n2);
  a.topLeftCorner(n1, n1) = g1.a();
  a.bottomLeftCorner(n2, n1) = g2.b() * g1.c();
  a.bottomRightCorner(n2, n2) = g2.a();
  Matrix b(n1 + n2, g1.inputs());
  b << g1.b(), g2.b() * g1.d();
  Matrix c(g2.outputs(), n1 + n2);
  c << g2.d() * g1.c(), g2.c();
  return StateSpace(std::move(a), std::move(b), std::move(c), g2.d() * g1.d(), g1.domain());
}

StateSpace parallel(const StateSpace& g1, const StateSpace& g2) {
  require_same_domain(g1, g2, "parallel");
  if (g1.inputs() != g2.inputs() || g1.outputs() != g2.outputs()) {
    throw Error(ErrorCode::DimensionMismatch, "parallel: port dimensions differ");
  }
  const Eigen::Index n1 = g1.states(), n2 = g2.states();
  Matrix a = Matrix::Zero(n1 + n2, n1 + n2);
  a.topLeftCorner(n1, n1) = g1.a();
  a.bottomRightCorner(n2, n2) = g2.a();
  Matrix b(n1 + n2, g1.inputs());
  b << g1.b(), g2.b();
  Matrix c(g1.outputs(), n1 + n2);
  c << g1.c(), g2.c();
  return StateSpace(std::move(a), std::move(b), std::move(c), g1.d() + g2.d(), g1.domain());
}

StateSpace block_diagonal(const StateSpace& g1, const StateSpace& g2) {
  require_same_domain(g1, g2, "block_diagonal");
  const Eigen::Index n1 = g1.states(), n2 = g2.states();
  const Eigen::Index m1 = g1.inputs(), m2 = g2.inputs();
  const Eigen::Index p1 = g1.outputs(), p2 = g2.outputs();
  Matrix a = Matrix::Zero(n1 + n2, n1 + n2);
  a.topLeftCorner(n1, n1) = g1.a();
  a.bottomRightCorner(n2, n2) = g2.a();
  Matrix b = Matrix::Zero(n1 + n2, m1 + m2);
  b.topLeftCorner(n1, m1) = g1.b();
  b.bottomRightCorner(n2, m2) = g2.b();
  Matrix c = Matrix::Zero(p1 + p2, n1 + n2);
  c.topLeftCorner(p1, n1) = g1.c();
  c.bottomRightCorner(p2, n2) = g2.c();
  Matrix d = Matrix::Zero(p1 + p2, m1 + m2);
  d.topLeftCorner(p1, m1) = g1.d();
  d.bottomRightCorner(p2, m2) = g2.d();
  return StateSpace(std::move(a), std::move(b), std::move(c), std::move(d), g1.domain());
}

StateSpace lft_lower(const PartitionedPlant& plant, const StateSpace& k) {
  const StateSpace& p = plant.sys();
  require_same_domain(p, k, "lft_lower");
  if (k.inputs() != plant.n_y() || k.outputs() != plant.n_u()) {
    throw Error(ErrorCode::DimensionMismatch, "lft_lower: controller ports do not match (y, u) partition");
  }
  const Eigen::Index n = p.states(), nk = k.states();
  const Eigen::Index nu = plant.n_u();

  const Matrix d22 = plant.d22();
  Eigen::FullPivLU<Matrix> loop(Matrix::Identity(nu, nu) - k.d() * d22);
  if (nu > 0 && (!loop.isInvertible() || loop.rcond() < 1e-12)) {
    throw Error(ErrorCode::AlgebraicLoop, "I - D22*DK is singular");
  }
  const Matrix m = nu > 0 ? loop.inverse() : Matrix(0, 0);

  // u = ux·x + uk·xk + uw·w
  const Matrix ux = m * k.d() * plant.c2();
  const Matrix uk = m * k.c();
  const Matrix uw = m * k.d() * plant.d21();
  // y = yx·x + yk·xk + yw·w
  const Matrix yx = plant.c2() + d22 * ux;
  const Matrix yk = d22 * uk;
  const Matrix yw = plant.d21() + d22 * uw;

  const Matrix b2 = plant.b2();
  const Matrix d12 = plant.d12();
  Matrix a(n + nk, n + nk);
  a << p.a() + b2 * ux, b2 * uk, k.b() * yx, k.a() + k.b() * yk;
  Matrix b(n + nk, plant.n_w());
  b << plant.b1() + b2 * uw, k.b() * yw;
  Matrix c(plant.n_z(), n + nk);
  c << plant.c1() + d12 * ux, d12 * uk;
  Matrix d = plant.d11() + d12 * uw;
  return StateSpace(std::move(a), std::move(b), std::move(c), std::move(d), p.domain());
}

StateSpace delay_block(std::size_t k, double sample_time) {
  const auto domain = TimeDomain::discrete(sample_time);
  if (k == 0) return StateSpace::gain(Matrix::Identity(1, 1), domain);
  const auto n = static_cast<Eigen::Index>(k);
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) a(i, i - 1) = 1.0;
  Matrix b = Matrix::Zero(n, 1);
  b(0, 0) = 1.0;
  Matrix c = Matrix::Zero(1, n);
  c(0, n - 1) = 1.0;
  return StateSpace(std::move(a), std::move(b), std::move(c), Matrix::Zero(1, 1), domain);
}

StateSpace select(const StateSpace& g, const std::vector<Eigen::Index>& outputs,
                  const std::vector<Eigen::Index>& inputs) {
  for (auto i : outputs) {
    if (i < 0 || i >= g.outputs()) throw Error(ErrorCode::DimensionMismatch, "select: output index out of range");
  }
  for (auto i : inputs) {
    if (i < 0 || i >= g.inputs()) throw Error(ErrorCode::DimensionMismatch, "select: input index out of range");
  }
  const auto p = static_cast<Eigen::Index>(outputs.size());
  const auto m = static_cast<Eigen::Index>(inputs.size());
  Matrix b(g.states(), m), c(p, g.states()), d(p, m);
  for (Eigen::Index j = 0; j < m; ++j) b.col(j) = g.b().col(inputs[static_cast<std::size_t>(j)]);
  for (Eigen::Index i = 0; i < p; ++i) {
    const auto oi = outputs[static_cast<std::size_t>(i)];
    c.row(i) = g.c().row(oi);
    for (Eigen::Index j = 0; j < m; ++j) d(i, j) = g.d()(oi, inputs[static_cast<std::size_t>(j)]);
  }
  return StateSpace(g.a(), std::move(b), std::move(c), std::move(d), g.domain());
}

StateSpace scale(const StateSpace& g, const Vector& out_scale, const Vector& in_scale) {
  if (out_scale.size() != g.outputs() || in_scale.size() != g.inputs()) {
    throw Error(ErrorCode::DimensionMismatch, "scale: one factor per channel required");
  }
  return StateSpace(g.a(), g.b() * in_scale.asDiagonal(), out_scale.asDiagonal() * g.c(),
                    out_scale.asDiagonal() * g.d() * in_scale.asDiagonal(), g.domain());
}

StateSpace stack_outputs(const StateSpace& g1, const StateSpace& g2) {
  require_same_domain(g1, g2, "stack_outputs");
  if (g1.inputs() != g2.inputs()) throw Error(ErrorCode::DimensionMismatch, "stack_outputs: input counts differ");
  const Eigen::Index n1 = g1.states(), n2 = g2.states();
  Matrix a = Matrix::Zero(n1 + n2, n1 + n2);
  a.topLeftCorner(n1, n1) = g1.a();
  a.bottomRightCorner(n2, n2) = g2.a();
  Matrix b(n1 + n2, g1.inputs());
  b << g1.b(), g2.b();
  Matrix c = Matrix::Zero(g1.outputs() + g2.outputs(), n1 + n2);
  c.topLeftCorner(g1.outputs(), n1) = g1.c();
  c.bottomRightCorner(g2.outputs(), n2) = g2.c();
  Matrix d(g1.outputs() + g2.outputs(), g1.inputs());
  d << g1.d(), g2.d();
  return StateSpace(std::move(a), std::move(b), std::move(c), std::move(d), g1.domain());
}

StateSpace balance(const StateSpace& g) {
  const Eigen::Index n = g.states();
  if (n == 0) return g;
  Matrix sys(n + g.outputs(), n + g.inputs());
  sys << g.a(), g.b(), g.c(), g.d();
  const Eigen::Index k = std::max(sys.rows(), sys.cols());
  Matrix square = Matrix::Zero(k, k);
  square.topLeftCorner(sys.rows(), sys.cols()) = sys;
  const Vector s = balancing_scales(square, n).head(n);
  return StateSpace(s.cwiseInverse().asDiagonal() * g.a() * s.asDiagonal(), s.cwiseInverse().asDiagonal() * g.b(),
                    g.c() * s.asDiagonal(), g.d(), g.domain());
}

Eigen::VectorXcd poles(const StateSpace& g) {
  if (g.states() == 0) return Eigen::VectorXcd(0);
  const Vector s = balancing_scales(g.a());
  Eigen::EigenSolver<Matrix> eig(s.cwiseInverse().asDiagonal() * g.a() * s.asDiagonal(), false);
  return eig.eigenvalues();
}

double stability_measure(const StateSpace& g) {
  const Eigen::VectorXcd p = poles(g);
  if (g.domain().is_discrete()) {
    return p.size() == 0 ? 0.0 : p.cwiseAbs().maxCoeff();
  }
  return p.size() == 0 ? -std::numeric_limits<double>::infinity() : p.real().maxCoeff();
}

bool is_stable(const StateSpace& g, double margin) {
  const double measure = stability_measure(g);
  if (!std::isfinite(measure) && g.states() > 0) return false;
  return g.domain().is_discrete() ? measure < 1.0 - margin : measure < -margin;
}

CMatrix evaluate_at(const StateSpace& g, std::complex<double> point) {
  const CMatrix d = g.d().cast<Complex>();
  const Eigen::Index n = g.states();
  if (n == 0) return d;
  CMatrix resolvent = -g.a().cast<Complex>();
  resolvent.diagonal().array() += point;
  Eigen::PartialPivLU<CMatrix> lu(resolvent);
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) throw Error(ErrorCode::NearPole, "evaluation point coincides with a pole");
  return g.c().cast<Complex>() * lu.solve(g.b().cast<Complex>()) + d;
}

CMatrix freq_response(const StateSpace& g, double omega) {
  const Complex point = g.domain().is_discrete() ? std::polar(1.0, omega) : Complex(0.0, omega);
  return evaluate_at(g, point);
}

double max_singular_value(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

double hinf_norm(const StateSpace& g, double rel_tol) {
  if (!is_stable(g)) throw Error(ErrorCode::UnstableSystem, "H-infinity norm requires a stable system");
  if (g.states() == 0) return max_singular_value(g.d().cast<Complex>());

  const bool discrete = g.domain().is_discrete();
  const Eigen::VectorXcd p = poles(g);
  auto gain = [&](double w) { return max_singular_value(freq_response(g, w)); };

  std::vector<double> grid;
  const int points = std::clamp(static_cast<int>(std::ceil(2.0 / std::max(rel_tol, 1e-6))), 1000, 20000);
  double lo, hi;
  if (discrete) {
    lo = 1e-7 * std::numbers::pi;
    hi = std::numbers::pi;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double arg = std::abs(std::arg(p(i)));
      if (arg > 0.0) grid.push_back(arg);
    }
    grid.push_back(0.0);
    grid.push_back(std::numbers::pi);
  } else {
    const double pmin = std::max(p.cwiseAbs().minCoeff(), 1e-12);
    const double pmax = std::max(p.cwiseAbs().maxCoeff(), 1e-12);
    lo = std::min(pmin, 1.0) * 1e-4;
    hi = std::max(pmax, 1.0) * 1e4;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      if (std::abs(p(i).imag()) > 0.0) grid.push_back(std::abs(p(i).imag()));
      grid.push_back(std::abs(p(i)));
    }
    grid.push_back(0.0);
  }
  const double step = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) grid.push_back(lo * std::exp(step * i));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) values[i] = gain(grid[i]);
  double best = *std::max_element(values.begin(), values.end());
  if (!discrete) best = std::max(best, max_singular_value(g.d().cast<Complex>()));

  // Golden-section refinement around every local maximum of the grid.
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const bool left_ok = i == 0 || values[i] >= values[i - 1];
    const bool right_ok = i + 1 == grid.size() || values[i] >= values[i + 1];
    if (!left_ok || !right_ok) continue;
    if (values[i] < best * (1.0 - 0.5)) continue;
    double a = grid[i == 0 ? 0 : i - 1];
    double b = grid[i + 1 == grid.size() ? i : i + 1];
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = gain(x1), f2 = gain(x2);
    for (int it = 0; it < 80 && (b - a) > 1e-12 * std::max(1.0, b); ++it) {
      if (f1 < f2) {
        a = x1; x1 = x2; f1 = f2; x2 = a + phi * (b - a); f2 = gain(x2);
      } else {
        b = x2; x2 = x1; f2 = f1; x1 = b - phi * (b - a); f1 = gain(x1);
      }
    }
    best = std::max({best, f1, f2});
  }
  return best;
}

StepResult step_states(const StateSpace& g, const Vector& x, const Vector& u) {
  if (!g.domain().is_discrete()) throw Error(ErrorCode::DomainMismatch, "step_states needs a discrete model");
  if (x.size() != g.states() || u.size() != g.inputs()) {
    throw Error(ErrorCode::DimensionMismatch, "step_states: state or input vector has the wrong length");
  }
  return StepResult{g.a() * x + g.b() * u, g.c() * x + g.d() * u};
}

Vector hankel_singular_values(const StateSpace& g) {
  if (!is_stable(g)) throw Error(ErrorCode::UnstableSystem, "Hankel singular values need a stable system");
  if (g.states() == 0) return Vector(0);
  const StateSpace cont = g.domain().is_discrete() ? inverse_bilinear(g, 2.0) : g;
  const Matrix wc = linalg::solve_lyapunov(cont.a(), cont.b() * cont.b().transpose());
  const Matrix wo = linalg::solve_lyapunov(cont.a().transpose(), cont.c().transpose() * cont.c());
  Eigen::JacobiSVD<Matrix> svd(linalg::psd_factor(wo).transpose() * linalg::psd_factor(wc));
  return svd.singularValues();
}

StateSpace balanced_truncation(const StateSpace& g, double tol) {
  if (!is_stable(g)) throw Error(ErrorCode::UnstableSystem, "balanced truncation needs a stable system");
  if (g.states() == 0) return g;
  // Hankel singular values are invariant under the Ts = 2 bilinear map, so
  // discrete systems are balanced through their continuous surrogate.
  const StateSpace cont = g.domain().is_discrete() ? inverse_bilinear(g, 2.0) : g;
  const Matrix wc = linalg::solve_lyapunov(cont.a(), cont.b() * cont.b().transpose());
  const Matrix wo = linalg::solve_lyapunov(cont.a().transpose(), cont.c().transpose() * cont.c());
  const Matrix lc = linalg::psd_factor(wc);
  const Matrix lo = linalg::psd_factor(wo);
  Eigen::JacobiSVD<Matrix> svd(lo.transpose() * lc, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& hsv = svd.singularValues();
  Eigen::Index r = 0;
  while (r < hsv.size() && hsv(r) > tol * hsv(0)) ++r;

  const Vector inv_root = hsv.head(r).cwiseSqrt().cwiseInverse();
  const Matrix t = lc * svd.matrixV().leftCols(r) * inv_root.asDiagonal();
  const Matrix ti = inv_root.asDiagonal() * svd.matrixU().leftCols(r).transpose() * lo.transpose();
  const StateSpace reduced(ti * cont.a() * t, ti * cont.b(), cont.c() * t, cont.d(), cont.domain());
  if (!g.domain().is_discrete()) return reduced;
  const StateSpace back = bilinear(reduced, 2.0);
  return StateSpace(back.a(), back.b(), back.c(), back.d(), g.domain());
}

}  // namespace phil
