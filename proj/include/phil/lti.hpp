#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phil/error.hpp"

namespace phil {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;

/// Continuous time, or discrete time with a strictly positive sample time.
class TimeDomain {
 public:
  static TimeDomain continuous() { return TimeDomain(0.0); }
  static TimeDomain discrete(double sample_time);

  bool is_discrete() const { return sample_time_ > 0.0; }
  bool is_continuous() const { return !is_discrete(); }
  /// Zero for continuous-time domains.
  double sample_time() const { return sample_time_; }

  bool operator==(const TimeDomain& other) const { return sample_time_ == other.sample_time_; }

 private:
  explicit TimeDomain(double ts) : sample_time_(ts) {}
  double sample_time_;
};

/// Scalar rational transfer function, coefficients in descending powers.
struct TransferFunction {
  std::vector<double> numerator;
  std::vector<double> denominator;
  TimeDomain domain = TimeDomain::continuous();

  /// Evaluates num(x)/den(x) at a complex point of the transfer-function variable.
  std::complex<double> evaluate(std::complex<double> x) const;
};

/// LTI system x' = A x + B u, y = C x + D u (or x[k+1] for discrete domains).
/// Immutable after construction.
class StateSpace {
 public:
  StateSpace(Matrix a, Matrix b, Matrix c, Matrix d, TimeDomain domain);

  /// Pure gain with an empty state.
  static StateSpace gain(Matrix d, TimeDomain domain);

  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }
  const Matrix& c() const { return c_; }
  const Matrix& d() const { return d_; }
  const TimeDomain& domain() const { return domain_; }

  Eigen::Index states() const { return a_.rows(); }
  Eigen::Index inputs() const { return b_.cols(); }
  Eigen::Index outputs() const { return c_.rows(); }

 private:
  Matrix a_, b_, c_, d_;
  TimeDomain domain_;
};

/// A StateSpace whose inputs are ordered (w..., u...) and outputs (z..., y...).
class PartitionedPlant {
 public:
  PartitionedPlant(StateSpace sys, Eigen::Index n_w, Eigen::Index n_u, Eigen::Index n_z,
                   Eigen::Index n_y, std::vector<std::string> input_names = {},
                   std::vector<std::string> output_names = {});

  const StateSpace& sys() const { return sys_; }
  Eigen::Index n_w() const { return n_w_; }
  Eigen::Index n_u() const { return n_u_; }
  Eigen::Index n_z() const { return n_z_; }
  Eigen::Index n_y() const { return n_y_; }
  const std::vector<std::string>& input_names() const { return input_names_; }
  const std::vector<std::string>& output_names() const { return output_names_; }

  // Block views of the realization.
  Matrix b1() const { return sys_.b().leftCols(n_w_); }
  Matrix b2() const { return sys_.b().rightCols(n_u_); }
  Matrix c1() const { return sys_.c().topRows(n_z_); }
  Matrix c2() const { return sys_.c().bottomRows(n_y_); }
  Matrix d11() const { return sys_.d().topLeftCorner(n_z_, n_w_); }
  Matrix d12() const { return sys_.d().topRightCorner(n_z_, n_u_); }
  Matrix d21() const { return sys_.d().bottomLeftCorner(n_y_, n_w_); }
  Matrix d22() const { return sys_.d().bottomRightCorner(n_y_, n_u_); }

 private:
  StateSpace sys_;
  Eigen::Index n_w_, n_u_, n_z_, n_y_;
  std::vector<std::string> input_names_;
  std::vector<std::string> output_names_;
};

struct StepResult {
  Vector x_next;
  Vector y;
};

inline constexpr double kDefaultStabilityMargin = 1e-9;

// Construction and interconnection.
StateSpace realize_tf(const TransferFunction& tf);
/// Signal flows through g1 first, then g2: response G2(ζ)·G1(ζ).
StateSpace series(const StateSpace& g1, const StateSpace& g2);
StateSpace parallel(const StateSpace& g1, const StateSpace& g2);
StateSpace block_diagonal(const StateSpace& g1, const StateSpace& g2);
/// Lower LFT: closes u = K y around the (u, y) ports of the plant.
StateSpace lft_lower(const PartitionedPlant& plant, const StateSpace& k);
StateSpace delay_block(std::size_t k, double sample_time);

/// Keeps the listed outputs and inputs, in the given order.
StateSpace select(const StateSpace& g, const std::vector<Eigen::Index>& outputs,
                  const std::vector<Eigen::Index>& inputs);
/// diag(out_scale) · G · diag(in_scale).
StateSpace scale(const StateSpace& g, const Vector& out_scale, const Vector& in_scale);
/// Stacks outputs of two systems driven by the same input.
StateSpace stack_outputs(const StateSpace& g1, const StateSpace& g2);

// Analysis.
/// Diagonal state similarity (powers of two) equalizing the row and column
/// norms of [A B; C D] over the state indices. Same transfer function.
StateSpace balance(const StateSpace& g);

Eigen::VectorXcd poles(const StateSpace& g);
bool is_stable(const StateSpace& g, double margin = kDefaultStabilityMargin);
/// Spectral radius for discrete systems, max real part for continuous ones.
double stability_measure(const StateSpace& g);
/// C(ζI − A)⁻¹B + D with ζ = jω (continuous, rad/s) or ζ = e^{jω} (discrete, rad/sample).
CMatrix freq_response(const StateSpace& g, double omega);
/// Response at an arbitrary complex point of the transfer-function variable.
CMatrix evaluate_at(const StateSpace& g, std::complex<double> point);
double max_singular_value(const CMatrix& m);
double hinf_norm(const StateSpace& g, double rel_tol = 1e-3);

StepResult step_states(const StateSpace& g, const Vector& x, const Vector& u);

/// Balanced truncation of a stable system, dropping states whose Hankel
/// singular value is below tol·(largest Hankel singular value).
StateSpace balanced_truncation(const StateSpace& g, double tol = 1e-10);
Vector hankel_singular_values(const StateSpace& g);

}  // namespace phil
