#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "lamorbit/integrate.hpp"
#include "lamorbit/model.hpp"

using namespace lamorbit;

TEST_CASE("exponential growth hits e") {
  ode::Rhs rhs = [](double, const double* y, double* dy) { dy[0] = y[0]; };
  const double y0[1] = {1.0};
  const ode::Result res = ode::integrate(rhs, std::span<const double>(y0, 1), 0.0, 1.0);
  REQUIRE(res.ok());
  CHECK(res.y_final()[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
}

TEST_CASE("harmonic oscillator closes after one turn") {
  ode::Rhs rhs = [](double, const double* y, double* dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  const double y0[2] = {1.0, 0.0};
  ode::Config cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-13;
  const double tau = 2.0 * std::acos(-1.0);
  const ode::Result res = ode::integrate(rhs, std::span<const double>(y0, 2), 0.0, tau, cfg);
  REQUIRE(res.ok());
  CHECK(std::abs(res.y_final()[0] - 1.0) <= 1e-8);
  CHECK(std::abs(res.y_final()[1]) <= 1e-8);

  // Dense output reproduces the trig solution between steps.
  for (double s : {0.3, 1.7, 2.9, 4.4, 6.0}) {
    const std::vector<double> y = res.eval(s);
    CHECK(std::abs(y[0] - std::cos(s)) <= 1e-8);
    CHECK(std::abs(y[1] + std::sin(s)) <= 1e-8);
  }
}

TEST_CASE("event location is sharp") {
  ode::Rhs rhs = [](double, const double* y, double* dy) { dy[0] = 1.0; };
  ode::Event ev;
  ev.g = [](double, const double* y) { return y[0]; };
  ev.direction = +1;
  ev.terminal = true;
  const double y0[1] = {-0.5};
  const ode::Result res =
      ode::integrate(rhs, std::span<const double>(y0, 1), 0.0, 2.0, {}, {ev});
  REQUIRE(res.status == ode::IntegrateStatus::TerminalEvent);
  CHECK(res.events.size() == 1);
  CHECK(res.events.front().t == doctest::Approx(0.5).epsilon(1e-10));

  // Non-terminal events record every crossing in the requested direction.
  ode::Rhs circ = [](double, const double* y, double* dy) {
    dy[0] = y[1];
    dy[1] = -y[0];
  };
  ode::Event zero_up;
  zero_up.g = [](double, const double* y) { return y[0]; };
  zero_up.direction = +1;
  zero_up.terminal = false;
  const double c0[2] = {1.0, 0.0};
  const double tau = 2.0 * std::acos(-1.0);
  const ode::Result laps =
      ode::integrate(circ, std::span<const double>(c0, 2), 0.0, 3.0 * tau, {}, {zero_up});
  REQUIRE(laps.ok());
  REQUIRE(laps.events.size() == 3);
  for (std::size_t k = 0; k < laps.events.size(); ++k) {
    CHECK(laps.events[k].t ==
          doctest::Approx(1.5 * tau / 2.0 + k * tau).epsilon(1e-9));
  }
}

TEST_CASE("fast and slow scalings trace the same curve") {
  const double eps = 1e-3;
  const State4 x0{0.1, 0.02, -0.9, 0.05};
  ode::Rhs slow = [eps](double, const double* y, double* dy) {
    const State4 f = model::vector_field_slow(State4{y[0], y[1], y[2], y[3]}, eps);
    for (int i = 0; i < 4; ++i) dy[i] = f[i];
  };
  ode::Rhs fast = [eps](double, const double* y, double* dy) {
    const State4 f = model::vector_field_fast(State4{y[0], y[1], y[2], y[3]}, eps);
    for (int i = 0; i < 4; ++i) dy[i] = f[i];
  };
  ode::Config cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-13;
  const auto a0 = x0.to_array();
  const double T = 0.002;
  const ode::Result on_slow =
      ode::integrate(slow, std::span<const double>(a0.data(), 4), 0.0, T, cfg);
  const ode::Result on_fast =
      ode::integrate(fast, std::span<const double>(a0.data(), 4), 0.0, T / eps, cfg);
  REQUIRE(on_slow.ok());
  REQUIRE(on_fast.ok());
  for (int i = 0; i < 4; ++i) {
    CHECK(on_slow.y_final()[i] == doctest::Approx(on_fast.y_final()[i]).epsilon(1e-8));
  }
}

TEST_CASE("a layer jump in slow time takes 2 xi_0 eps") {
  const double eps = 1e-3;
  const double w0 = std::tanh(-5.0);
  const State4 x0{0.0, 0.0, w0, 0.5 * (1.0 - w0 * w0)};
  ode::Rhs rhs = [eps](double, const double* y, double* dy) {
    const State4 f = model::vector_field_slow(State4{y[0], y[1], y[2], y[3]}, eps);
    for (int i = 0; i < 4; ++i) dy[i] = f[i];
  };
  ode::Event cross;
  cross.g = [](double, const double* y) { return y[2]; };
  cross.direction = +1;
  cross.terminal = true;
  ode::Config cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-13;
  const auto a0 = x0.to_array();
  const ode::Result res =
      ode::integrate(rhs, std::span<const double>(a0.data(), 4), 0.0, 0.05, cfg, {cross});
  REQUIRE(res.status == ode::IntegrateStatus::TerminalEvent);
  CHECK(std::abs(res.events.front().t - 2.0 * 5.0 * eps) <= 1e-4);

  // The Hamiltonian is conserved across the jump.
  const std::vector<double>& yf = res.y_final();
  const double h0 = model::hamiltonian(x0);
  const double h1 = model::hamiltonian(State4{yf[0], yf[1], yf[2], yf[3]});
  CHECK(std::abs(h1 - h0) <= 1e-10);
}

TEST_CASE("level projection restores H exactly") {
  const State4 x{0.31, -0.07, 0.84, 0.02};
  for (double mu : {-0.1, 0.0, 0.02}) {
    const State4 p = ode::project_to_level(x, mu);
    CHECK(std::abs(model::hamiltonian(p) - mu) <= 1e-12);
    const double moved = std::abs(p.u - x.u) + std::abs(p.v - x.v) +
                         std::abs(p.w - x.w) + std::abs(p.z - x.z);
    CHECK(moved <= 10.0 * std::abs(model::hamiltonian(x) - mu) + 1e-12);
  }
}

TEST_CASE("step budget failure is reported, not thrown") {
  ode::Rhs rhs = [](double, const double* y, double* dy) { dy[0] = y[0]; };
  ode::Config cfg;
  cfg.max_steps = 3;
  const double y0[1] = {1.0};
  const ode::Result res = ode::integrate(rhs, std::span<const double>(y0, 1), 0.0, 50.0, cfg);
  CHECK(res.status == ode::IntegrateStatus::MaxSteps);
  CHECK(!res.ok());
  CHECK(!res.message.empty());
}
