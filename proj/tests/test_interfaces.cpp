#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "phil/interfaces.hpp"
#include "phil/sim.hpp"
#include "util.hpp"

using namespace phil;

namespace {

const double kTs = 50e-6;

ControllerRealization as_controller(StateSpace sys) { return ControllerRealization{std::move(sys), 1.0, {}}; }

}  // namespace

TEST_CASE("ITM has one state, unity DC gain and ignores Vc") {
  for (double hz : {10.0, 150.0, 600.0, 9000.0}) {
    const InterfaceAlgorithm itm = itm_interface(hz, kTs);
    CHECK(itm.kind == InterfaceKind::ITM);
    CHECK(itm.realization.states() == 1);
    const CMatrix dc = freq_response(itm.realization, 0.0);
    CHECK(std::abs(dc(1, 3) - 1.0) < 1e-12);
    CHECK(std::abs(dc(0, 0) - 1.0) == 0.0);
    for (double w : {0.0, 0.1, 1.0, 3.0}) {
      const CMatrix f = freq_response(itm.realization, w);
      CHECK(std::abs(f(0, 1)) == 0.0);
      CHECK(std::abs(f(1, 1)) == 0.0);
    }
  }
}

TEST_CASE("ITM with a cutoff near Nyquist tracks a step in Id") {
  const InterfaceAlgorithm itm = itm_interface(0.49 / kTs, kTs);
  Vector x = Vector::Zero(1);
  for (int k = 0; k < 12; ++k) {
    Vector y = Vector::Zero(4);
    y(3) = 1.0;
    const StepResult r = step_states(itm.realization, x, y);
    if (k >= 5) CHECK(std::abs(r.y(1) - 1.0) <= 0.02);
    x = r.x_next;
  }
}

TEST_CASE("ITM rejects a cutoff above Nyquist") {
  CHECK_THROWS_AS(itm_interface(20000.0, kTs), Error);
}

TEST_CASE("wrapping with unit scales is the identity") {
  std::mt19937 rng(71);
  const StateSpace k = test::random_stable(rng, 3, 4, 2, TimeDomain::discrete(kTs));
  const InterfaceAlgorithm w = wrap_scaled_controller(as_controller(k), ScalingSpec::identity());
  CHECK(w.realization.a() == k.a());
  CHECK(w.realization.b() == k.b());
  CHECK(w.realization.c() == k.c());
  CHECK(w.realization.d() == k.d());
}

TEST_CASE("static V1 to V gain of one becomes 200/120 physically") {
  Matrix d = Matrix::Zero(2, 4);
  d(0, 0) = 1.0;
  const InterfaceAlgorithm w =
      wrap_scaled_controller(as_controller(StateSpace::gain(d, TimeDomain::discrete(kTs))), ScalingSpec{});
  CHECK(std::abs(w.realization.d()(0, 0) - 200.0 / 120.0) < 1e-15);
}

TEST_CASE("wrapped response equals Du K Dy") {
  std::mt19937 rng(73);
  std::uniform_real_distribution<double> u(0.0, std::numbers::pi);
  const StateSpace k = test::random_stable(rng, 5, 4, 2, TimeDomain::discrete(kTs));
  const ScalingSpec sp;
  const InterfaceAlgorithm w = wrap_scaled_controller(as_controller(k), sp);
  Eigen::Vector2d du(sp.u_scales[0], sp.u_scales[1]);
  Eigen::Vector4d dy(sp.y_scales[0], sp.y_scales[1], sp.y_scales[2], sp.y_scales[3]);
  for (int i = 0; i < 50; ++i) {
    const double om = u(rng);
    const CMatrix expect = du.asDiagonal() * freq_response(k, om) * dy.asDiagonal();
    CHECK(test::rel_err(freq_response(w.realization, om), expect) < 1e-12);
  }
  // poles untouched
  CHECK(is_stable(w.realization) == is_stable(k));
  const StateSpace unstable(1.5 * Matrix::Identity(2, 2), Matrix::Ones(2, 4), Matrix::Ones(2, 2), Matrix::Zero(2, 4),
                            TimeDomain::discrete(kTs));
  CHECK_FALSE(is_stable(wrap_scaled_controller(as_controller(unstable), sp).realization));
}

TEST_CASE("wrapping rejects wrong channel counts") {
  CHECK_THROWS_AS(wrap_scaled_controller(as_controller(StateSpace::gain(Matrix::Zero(2, 3), TimeDomain::discrete(kTs))),
                                         ScalingSpec{}),
                  Error);
}

TEST_CASE("closing any interface around the physical plant is well posed") {
  std::mt19937 rng(79);
  const PhilScenario s;
  CHECK_NOTHROW(closed_loop_system(s, itm_interface(150.0, kTs)));
  for (int i = 0; i < 5; ++i) {
    InterfaceAlgorithm a;
    a.kind = InterfaceKind::HInf;
    a.realization = test::random_stable(rng, 2, 4, 2, TimeDomain::discrete(kTs));
    CHECK_NOTHROW(closed_loop_system(s, a));
  }
}
