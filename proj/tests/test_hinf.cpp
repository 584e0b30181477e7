#include <doctest.h>

#include <cmath>
#include <random>

#include "phil/hinf.hpp"
#include "phil/plant.hpp"
#include "util.hpp"

using namespace phil;

namespace {

const TimeDomain kDt = TimeDomain::discrete(1e-3);

const PartitionedPlant& default_plant() {
  static const PartitionedPlant p = assemble_plant(PhilScenario{}, ScalingSpec{}, WeightSpec{}, Objective::Transparency);
  return p;
}

const ControllerRealization& default_controller() {
  static const ControllerRealization k = synthesize(default_plant());
  return k;
}

void check_sound(const PartitionedPlant& p, const ControllerRealization& k) {
  const StateSpace cl = lft_lower(p, k.sys);
  CHECK(is_stable(cl));
  CHECK(hinf_norm(cl, 1e-6) <= k.gamma_achieved * 1.001);
}

void check_monotone(const SynthesisReport& r) {
  // once feasible at γ, every larger γ tried must be feasible
  for (const GammaTrial& a : r.trials) {
    for (const GammaTrial& b : r.trials) {
      if (a.feasible && b.gamma > a.gamma) CHECK(b.feasible);
    }
  }
}

}  // namespace

TEST_CASE("static plant with a known optimum") {
  // z = [1 + K; K] w, y = w: the best gain is K = −1/2 with γ* = 1/√2
  Matrix b = Matrix::Zero(1, 2), c = Matrix::Zero(3, 1), d(3, 2);
  d << 1, 1,
       0, 1,
       1, 0;
  const PartitionedPlant p(StateSpace(Matrix::Constant(1, 1, 0.5), b, c, d, kDt), 1, 1, 2, 1);

  double brute = INFINITY, k_best = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double k = -2.0 + 4.0 * i / 200000.0;
    const double g = std::hypot(1.0 + k, k);
    if (g < brute) brute = g, k_best = k;
  }
  CHECK(std::abs(brute - 1.0 / std::sqrt(2.0)) < 1e-9);
  CHECK(std::abs(k_best + 0.5) < 1e-4);

  const ControllerRealization k = synthesize(p);
  CHECK(k.gamma_achieved >= brute * (1.0 - 1e-9));
  CHECK(k.gamma_achieved <= brute * (1.0 + 5e-3));
  check_sound(p, k);
  check_monotone(k.report);
}

TEST_CASE("control-irrelevant plant returns the zero controller") {
  std::mt19937 rng(61);
  const StateSpace p11 = test::random_stable(rng, 3, 1, 1, kDt);
  Matrix b(3, 2), c(2, 3), d = Matrix::Zero(2, 2);
  b << p11.b(), Matrix::Zero(3, 1);
  c << p11.c(), Matrix::Random(1, 3);
  d(0, 0) = p11.d()(0, 0);
  d(1, 0) = 1.0;
  const PartitionedPlant p(StateSpace(p11.a(), b, c, d, kDt), 1, 1, 1, 1);
  const ControllerRealization k = synthesize(p);
  CHECK(k.report.control_irrelevant);
  CHECK(k.sys.d().norm() == 0.0);
  CHECK(std::abs(k.gamma_achieved - hinf_norm(p11)) < 1e-9);
}

TEST_CASE("random dynamic plants: soundness and monotone feasibility") {
  std::mt19937 rng(67);
  for (int trial = 0; trial < 6; ++trial) {
    const StateSpace g = test::random_stable(rng, 4, 4, 4, kDt);
    // inputs (w1, w2, u1, u2) outputs (z1, z2, y1, y2), regular D12 and D21
    Matrix d = g.d();
    d.topRightCorner(2, 2) = Matrix::Identity(2, 2) + 0.2 * d.topRightCorner(2, 2);
    d.bottomLeftCorner(2, 2) = Matrix::Identity(2, 2) + 0.2 * d.bottomLeftCorner(2, 2);
    const PartitionedPlant p(StateSpace(g.a(), g.b(), g.c(), d, kDt), 2, 2, 2, 2);
    const ControllerRealization k = synthesize(p);
    check_sound(p, k);
    check_monotone(k.report);
    CHECK(k.report.gamma_infeasible < k.gamma_achieved);
  }
}

TEST_CASE("rank-deficient D12 and D21 are reported") {
  // two actuators but one performance output: D12 of the surrogate cannot have full column rank
  Matrix b(1, 3), c(2, 1), d = Matrix::Ones(2, 3);
  b << 1, 1, 1;
  c << 1, 1;
  const PartitionedPlant p(StateSpace(Matrix::Constant(1, 1, 0.5), b, c, d, kDt), 1, 2, 1, 1);
  try {
    synthesize(p);
    FAIL("expected RankDeficientD12");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RankDeficientD12);
  }
  // two measurements but one exogenous input
  Matrix b2(1, 2), c2(3, 1), d2 = Matrix::Ones(3, 2);
  b2 << 1, 1;
  c2 << 1, 1, 1;
  const PartitionedPlant q(StateSpace(Matrix::Constant(1, 1, 0.5), b2, c2, d2, kDt), 1, 1, 1, 2);
  try {
    synthesize(q);
    FAIL("expected RankDeficientD21");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RankDeficientD21);
  }
}

TEST_CASE("default plant: sound controller and Riccati self-checks") {
  const ControllerRealization& k = default_controller();
  check_sound(default_plant(), k);
  check_monotone(k.report);
  CHECK(k.report.x_residual <= 1e-8);
  CHECK(k.report.y_residual <= 1e-8);
  CHECK(k.sys.inputs() == 4);
  CHECK(k.sys.outputs() == 2);
  CHECK(k.sys.domain() == default_plant().sys().domain());
}

TEST_CASE("default plant passes frequency validation") {
  const ValidationReport r = validate_closed_loop(default_plant(), default_controller(), 1000.0);
  CHECK(r.stable);
  CHECK(r.pass);
  CHECK(r.frequencies_hz.size() >= 500);
  CHECK(r.frequencies_hz.back() == 1000.0);
  CHECK(r.channels.size() == 30);
  REQUIRE(r.worst);
  CHECK(r.worst->max_gain_db < 0.0);
}

TEST_CASE("zero controller on a plant with a large P11 fails and names the channel") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(0, 1) = 1.0;
  d(1, 0) = 1.0;
  const PartitionedPlant p(StateSpace(Matrix::Constant(1, 1, 0.2), Matrix::Zero(1, 2), Matrix::Zero(2, 1), d, kDt),
                           1, 1, 1, 1, {"w", "u"}, {"z", "y"});
  const ValidationReport r = validate_closed_loop(p, StateSpace::gain(Matrix::Zero(1, 1), kDt), 100.0, 600);
  CHECK(r.stable);
  CHECK_FALSE(r.pass);
  REQUIRE(r.worst);
  CHECK(r.worst->input == "w");
  CHECK(r.worst->output == "z");
  CHECK(r.worst->max_gain_db == doctest::Approx(20.0 * std::log10(3.0)));
}

TEST_CASE("sign-flipped controller destabilizes the loop") {
  const StateSpace& k = default_controller().sys;
  const StateSpace flipped(k.a(), k.b(), -k.c(), -k.d(), k.domain());
  const StateSpace cl = lft_lower(default_plant(), flipped);
  CHECK(stability_measure(cl) > 1.0);
  const ValidationReport r = validate_closed_loop(default_plant(), flipped, 1000.0);
  CHECK_FALSE(r.stable);
  CHECK_FALSE(r.pass);
  CHECK(r.gains_db.empty());
}

TEST_CASE("scaling one error channel scales its closed-loop gain") {
  const double alpha = 2.5;
  ScalingSpec sp;
  sp.z_scales[0] *= alpha;
  const PartitionedPlant tight = assemble_plant(PhilScenario{}, sp, WeightSpec{}, Objective::Transparency);
  const StateSpace a = lft_lower(default_plant(), default_controller().sys);
  const StateSpace b = lft_lower(tight, default_controller().sys);
  for (double w : {1e-3, 0.05, 0.3}) {
    const CMatrix fa = freq_response(a, w), fb = freq_response(b, w);
    CHECK((fb.row(0) - alpha * fa.row(0)).norm() <= 1e-9 * fb.row(0).norm());
    CHECK((fb.bottomRows(5) - fa.bottomRows(5)).norm() <= 1e-9 * fa.norm());
  }
  // the stricter objective cannot be met by the nominal controller at 0 dB
  ScalingSpec hard;
  hard.z_scales[0] *= 10.0;
  const PartitionedPlant strict = assemble_plant(PhilScenario{}, hard, WeightSpec{}, Objective::Transparency);
  const ValidationReport r = validate_closed_loop(strict, default_controller(), 1000.0);
  CHECK_FALSE(r.pass);
  const ControllerRealization k2 = synthesize(strict);
  CHECK(k2.gamma_achieved > default_controller().gamma_achieved);
  if (k2.gamma_achieved < 1.0) CHECK(validate_closed_loop(strict, k2, 1000.0).pass);
}

TEST_CASE("synthesis options are validated") {
  SynthesisOptions o;
  o.gamma_lo = 10.0;
  o.gamma_hi = 1.0;
  CHECK_THROWS_AS(o.validate(), Error);
}
