#include <doctest.h>

#include <cmath>
#include <numbers>

#include "phil/discretization.hpp"
#include "phil/lti.hpp"
#include "util.hpp"

using namespace phil;
using Cplx = std::complex<double>;

namespace {

const TimeDomain kCont = TimeDomain::continuous();

StateSpace first_order(double pole) { return realize_tf({{1.0}, {1.0, pole}, kCont}); }

StateSpace amplifier() { return realize_tf({{6.221e9}, {1.0, 1.255e5, 6.099e9}, kCont}); }

}  // namespace

TEST_CASE("realize_tf canonical forms") {
  const StateSpace g = first_order(1.0);
  REQUIRE(g.states() == 1);
  CHECK(g.a()(0, 0) == doctest::Approx(-1.0));
  CHECK(g.b()(0, 0) * g.c()(0, 0) == doctest::Approx(1.0));
  CHECK(g.d()(0, 0) == 0.0);

  const StateSpace k = realize_tf({{5.0}, {1.0}, kCont});
  CHECK(k.states() == 0);
  CHECK(k.d()(0, 0) == 5.0);

  const StateSpace a = amplifier();
  CHECK(a.states() == 2);
  CHECK(std::abs(freq_response(a, 0.0)(0, 0) - 6.221e9 / 6.099e9) < 1e-12);
}

TEST_CASE("realize_tf rejects improper and degenerate input") {
  CHECK_THROWS_AS(realize_tf({{1.0, 0.0, 0.0}, {1.0, 1.0}, kCont}), Error);
  CHECK_THROWS_AS(realize_tf({{1.0}, {0.0, 0.0}, kCont}), Error);
}

TEST_CASE("series, parallel, lft examples") {
  const StateSpace g2 = StateSpace::gain(Matrix::Constant(1, 1, 2.0), kCont);
  const StateSpace g3 = StateSpace::gain(Matrix::Constant(1, 1, 3.0), kCont);
  CHECK(series(g2, g3).d()(0, 0) == 6.0);
  CHECK(parallel(g2, StateSpace::gain(Matrix::Constant(1, 1, -2.0), kCont)).d()(0, 0) == 0.0);
  CHECK(std::abs(freq_response(series(first_order(1.0), first_order(2.0)), 0.0)(0, 0) - 0.5) < 1e-14);

  Matrix p(2, 2);
  p << 1, 1, 1, 0;
  const PartitionedPlant plant(StateSpace::gain(p, kCont), 1, 1, 1, 1);
  CHECK(lft_lower(plant, StateSpace::gain(Matrix::Constant(1, 1, 0.5), kCont)).d()(0, 0) == doctest::Approx(1.5));
  CHECK(lft_lower(plant, StateSpace::gain(Matrix::Zero(1, 1), kCont)).d()(0, 0) == 1.0);
}

TEST_CASE("lft with P12 = P21 = 0 gives P11 for any K") {
  std::mt19937 rng(7);
  const StateSpace p11 = test::random_stable(rng, 3, 1, 1, kCont);
  Matrix a = p11.a(), b(3, 2), c(2, 3), d = Matrix::Zero(2, 2);
  b << p11.b(), Matrix::Zero(3, 1);
  c << p11.c(), Matrix::Zero(1, 3);
  d(0, 0) = p11.d()(0, 0);
  d(1, 1) = 0.3;
  const PartitionedPlant plant(StateSpace(a, b, c, d, kCont), 1, 1, 1, 1);
  const StateSpace k = test::random_stable(rng, 2, 1, 1, kCont);
  const StateSpace cl = lft_lower(plant, k);
  for (double w : {0.0, 0.3, 2.0, 40.0}) {
    CHECK(test::rel_err(freq_response(cl, w), freq_response(p11, w)) < 1e-12);
  }
}

TEST_CASE("is_stable examples") {
  const TimeDomain dt = TimeDomain::discrete(1.0);
  CHECK(is_stable(StateSpace(Matrix::Constant(1, 1, 0.5), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1), dt)));
  CHECK_FALSE(is_stable(StateSpace(Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1), dt)));
  // quadratic root formula for s² + 1.255e5 s + 6.099e9 (complex pair)
  const double b = 1.255e5, c = 6.099e9;
  const double re = -b / 2.0, im = std::sqrt(4.0 * c - b * b) / 2.0;
  CHECK(re < 0.0);
  CHECK(is_stable(amplifier()));
  const Eigen::VectorXcd p = poles(amplifier());
  for (Eigen::Index i = 0; i < 2; ++i) {
    CHECK(std::abs(p(i).real() - re) < 1e-9 * std::abs(re));
    CHECK(std::abs(std::abs(p(i).imag()) - im) < 1e-9 * im);
  }
}

TEST_CASE("freq_response examples") {
  CHECK(freq_response(StateSpace::gain(Matrix::Constant(1, 1, 3.0), kCont), 17.0)(0, 0) == Cplx(3.0, 0.0));
  CHECK(std::abs(std::abs(freq_response(first_order(1.0), 1.0)(0, 0)) - 1.0 / std::sqrt(2.0)) < 1e-15);
  const double ts = 1e-3;
  const StateSpace integ(Matrix::Ones(1, 1), Matrix::Constant(1, 1, ts), Matrix::Ones(1, 1), Matrix::Zero(1, 1),
                         TimeDomain::discrete(ts));
  const Cplx at_pi = freq_response(integ, std::numbers::pi)(0, 0);
  CHECK(std::abs(at_pi - Cplx(-ts / 2.0, 0.0)) < 1e-15);
}

TEST_CASE("hinf_norm examples and brute-force oracle") {
  Matrix d(2, 2);
  d << 3, 0, 0, 4;
  CHECK(hinf_norm(StateSpace::gain(d, kCont)) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(hinf_norm(first_order(1.0)) == doctest::Approx(1.0).epsilon(1e-3));

  const StateSpace a = amplifier();
  double grid_max = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double w = std::pow(10.0, 1.0 + 7.0 * i / (n - 1));
    const Cplx s(0.0, w);
    grid_max = std::max(grid_max, std::abs(6.221e9 / (s * s + 1.255e5 * s + 6.099e9)));
  }
  const double norm = hinf_norm(a, 1e-6);
  CHECK(norm >= grid_max * (1.0 - 1e-9));
  CHECK(norm <= grid_max * (1.0 + 1e-6));
}

TEST_CASE("delay_block examples") {
  const double ts = 1e-3;
  const StateSpace d0 = delay_block(0, ts);
  CHECK(d0.states() == 0);
  CHECK(d0.d()(0, 0) == 1.0);
  const StateSpace d1 = delay_block(1, ts);
  CHECK(std::abs(freq_response(d1, std::numbers::pi / 2.0)(0, 0) - Cplx(0.0, -1.0)) < 1e-15);

  const StateSpace d2 = delay_block(2, ts);
  Vector x = Vector::Zero(d2.states());
  for (int k = 0; k < 5; ++k) {
    const StepResult r = step_states(d2, x, Vector::Constant(1, k == 0 ? 1.0 : 0.0));
    CHECK(r.y(0) == (k == 2 ? 1.0 : 0.0));
    x = r.x_next;
  }
}

TEST_CASE("step_states examples") {
  const TimeDomain dt = TimeDomain::discrete(0.1);
  const StateSpace g(Matrix::Zero(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1), dt);
  const StepResult r = step_states(g, Vector::Zero(1), Vector::Constant(1, 5.0));
  CHECK(r.x_next(0) == 5.0);
  CHECK(r.y(0) == 0.0);

  const StepResult s = step_states(StateSpace::gain(Matrix::Constant(1, 1, 2.0), dt), Vector(0), Vector::Constant(1, 3.0));
  CHECK(s.y(0) == 6.0);
  CHECK(s.x_next.size() == 0);

  const double ts = 0.1;
  const StateSpace integ = zoh(realize_tf({{1.0}, {1.0, 0.0}, kCont}), ts);
  Vector x = Vector::Zero(1);
  for (int k = 0; k < 50; ++k) {
    const StepResult q = step_states(integ, x, Vector::Ones(1));
    CHECK(std::abs(q.y(0) - k * ts) < 1e-12);
    x = q.x_next;
  }
}

TEST_CASE("interconnection identities at random frequencies") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> wdist(-2.0, 3.0);
  for (const TimeDomain domain : {kCont, TimeDomain::discrete(1e-3)}) {
    const StateSpace g1 = test::random_stable(rng, 3, 2, 2, domain);
    const StateSpace g2 = test::random_stable(rng, 4, 2, 2, domain);
    const StateSpace gs = series(g1, g2), gp = parallel(g1, g2), gb = block_diagonal(g1, g2);
    // plant with 1 w, 2 u, 1 z, 2 y
    const StateSpace psys = test::random_stable(rng, 5, 3, 3, domain);
    const PartitionedPlant plant(psys, 1, 2, 1, 2);
    Matrix kd(2, 2);
    kd << 0.1, -0.05, 0.02, 0.08;
    const StateSpace k(test::random_stable(rng, 2, 2, 2, domain).a(), Matrix::Identity(2, 2) * 0.1,
                       Matrix::Identity(2, 2) * 0.1, kd, domain);
    const StateSpace cl = lft_lower(plant, k);
    for (int i = 0; i < 100; ++i) {
      double w = std::pow(10.0, wdist(rng));
      if (domain.is_discrete()) w = std::fmod(w, std::numbers::pi);
      const CMatrix f1 = freq_response(g1, w), f2 = freq_response(g2, w);
      CHECK(test::rel_err(freq_response(gs, w), f2 * f1) < 1e-10);
      CHECK(test::rel_err(freq_response(gp, w), f1 + f2) < 1e-10);
      CMatrix bd = CMatrix::Zero(4, 4);
      bd.topLeftCorner(2, 2) = f1;
      bd.bottomRightCorner(2, 2) = f2;
      CHECK(test::rel_err(freq_response(gb, w), bd) < 1e-10);

      const CMatrix p = freq_response(psys, w), kf = freq_response(k, w);
      const CMatrix p11 = p.topLeftCorner(1, 1), p12 = p.topRightCorner(1, 2);
      const CMatrix p21 = p.bottomLeftCorner(2, 1), p22 = p.bottomRightCorner(2, 2);
      const CMatrix lft = p11 + p12 * kf * (CMatrix::Identity(2, 2) - p22 * kf).inverse() * p21;
      CHECK(test::rel_err(freq_response(cl, w), lft) < 1e-10);
    }
  }
}

TEST_CASE("hinf_norm bounds every sampled gain") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const StateSpace g = test::random_stable(rng, 4, 2, 2, kCont);
    const double norm = hinf_norm(g, 1e-6);
    double grid = 0.0;
    for (int i = 0; i <= 20000; ++i) {
      const double w = i == 0 ? 0.0 : std::pow(10.0, -3.0 + 6.0 * i / 20000.0);
      const double s = max_singular_value(freq_response(g, w));
      CHECK(s <= norm * (1.0 + 1e-9));
      grid = std::max(grid, s);
    }
    CHECK(norm <= grid * (1.0 + 1e-3));
  }
}

TEST_CASE("delay_block shifts any sequence by k samples") {
  std::mt19937 rng(5);
  std::normal_distribution<double> nd;
  for (std::size_t k : {0u, 1u, 3u, 7u}) {
    const StateSpace d = delay_block(k, 1e-3);
    std::vector<double> in(40), out;
    for (double& v : in) v = nd(rng);
    Vector x = Vector::Zero(d.states());
    for (double v : in) {
      const StepResult r = step_states(d, x, Vector::Constant(1, v));
      out.push_back(r.y(0));
      x = r.x_next;
    }
    for (std::size_t i = 0; i < in.size(); ++i) CHECK(out[i] == (i < k ? 0.0 : in[i - k]));
  }
}

TEST_CASE("is_stable of random closed loops agrees with impulse simulation") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> kg(-3.0, 3.0);
  const TimeDomain dt = TimeDomain::discrete(1.0);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const PartitionedPlant plant(test::random_stable(rng, 3, 2, 2, dt), 1, 1, 1, 1);
    const StateSpace k = StateSpace::gain(Matrix::Constant(1, 1, kg(rng)), dt);
    const StateSpace cl = lft_lower(plant, k);
    const double rho = stability_measure(cl);
    if (std::abs(rho - 1.0) < 0.02) continue;  // too close to the boundary for 10k steps
    Vector x = Vector::Zero(cl.states());
    bool bounded = true;
    for (int n = 0; n < 10000 && bounded; ++n) {
      const StepResult r = step_states(cl, x, Vector::Constant(1, n == 0 ? 1.0 : 0.0));
      x = r.x_next;
      if (!(std::abs(r.y(0)) <= 1e6) || !(x.norm() <= 1e6)) bounded = false;
    }
    CHECK(is_stable(cl) == bounded);
    ++checked;
  }
  CHECK(checked > 20);
}

TEST_CASE("balance keeps the transfer function") {
  std::mt19937 rng(17);
  StateSpace g = test::random_stable(rng, 4, 2, 2, kCont);
  Matrix t = Vector::LinSpaced(4, -20.0, 20.0).unaryExpr([](double e) { return std::pow(2.0, e); }).asDiagonal();
  const StateSpace bad(t * g.a() * t.inverse(), t * g.b(), g.c() * t.inverse(), g.d(), kCont);
  const StateSpace bal = balance(bad);
  for (double w : {0.0, 0.7, 5.0}) CHECK(test::rel_err(freq_response(bal, w), freq_response(g, w)) < 1e-10);
}

TEST_CASE("dimension and domain errors carry codes") {
  const StateSpace c = first_order(1.0);
  const StateSpace d = delay_block(1, 1e-3);
  try {
    series(c, d);
    FAIL("expected DomainMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DomainMismatch);
  }
  Matrix two = Matrix::Ones(2, 2);
  try {
    series(StateSpace::gain(two, kCont), c);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}
