#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "lamorbit/io.hpp"
#include "lamorbit/model.hpp"
#include "lamorbit/periodic.hpp"
#include "lamorbit/seed.hpp"

using namespace lamorbit;

namespace {

const OrbitProfile& seed_1e3() {
  static const OrbitProfile orbit = seed::build_seed_orbit(1e-3);
  return orbit;
}

}  // namespace

TEST_CASE("slow-manifold transit boundary data") {
  const seed::SmstResult smst = seed::smst_slow_manifold(kMuMin, 1e-3);
  CHECK(smst.residual <= 1e-9);
  CHECK(smst.T_s > 0.0);
  // The landing points straddle w = 0 symmetrically.
  CHECK(std::abs(smst.w_L + smst.w_R) <= 1e-9);
  CHECK(smst.w_L < 0.0);
  // Entry/exit angles away from the fast eigendirections.
  CHECK(smst.boundary.angle_left > 1e-3);
  CHECK(smst.boundary.angle_right > 1e-3);
}

TEST_CASE("seed orbit satisfies the periodic-orbit contract") {
  const OrbitProfile& orbit = seed_1e3();
  CHECK(orbit.period > 0.0);
  CHECK(orbit.period < 1.0);
  CHECK(orbit.residual_norm <= 1e-10);
  CHECK(std::abs(orbit.lambda) <= 1e-8);
  CHECK(closure_error(orbit) <= 1e-9);
  CHECK(level_error(orbit) <= 1e-8);
  CHECK(hamiltonian_spread(orbit) <= 1e-8);
  CHECK(symmetry_error_s1(orbit) <= 1e-6);
  CHECK(min_w(orbit) >= -1.1);
  CHECK(max_w(orbit) <= 1.1);
  CHECK(orbit.params.mu == doctest::Approx(kMuMin + 1e-3).epsilon(1e-12));
  CHECK(orbit.params.epsilon == doctest::Approx(1e-3).epsilon(1e-14));
}

TEST_CASE("seed loop swells toward the double-heteroclinic level") {
  // The quarter shoot follows the layer loop, which approaches the
  // double-heteroclinic connection as mu -> -1/8: the quarter period grows
  // while the shoot stays well-conditioned.
  double prev_T = 0.0;
  for (const double mu : {-0.112, -0.118, -0.124}) {
    const double w_t = -std::sqrt(1.0 - std::sqrt(1.0 + 8.0 * mu));
    const seed::ShootResult shot = seed::quarter_orbit_shoot(mu, 1e-3, 0.0, w_t, 1e-2);
    CHECK(shot.residual <= 1e-9);
    CHECK(shot.jacobian_condition < 1e8);
    CHECK(shot.T_quarter > prev_T);
    prev_T = shot.T_quarter;
  }
}

TEST_CASE("seed works across its documented eps window") {
  const OrbitProfile big = seed::build_seed_orbit(1e-2);
  CHECK(big.residual_norm <= 1e-10);
  CHECK(std::abs(big.lambda) <= 1e-8);
  CHECK_THROWS_AS(seed::build_seed_orbit(5e-5), std::invalid_argument);
  CHECK_THROWS_AS(seed::build_seed_orbit(0.5), std::invalid_argument);
}

TEST_CASE("re-solving at nearby parameters tracks the level") {
  const OrbitProfile& orbit = seed_1e3();
  Params p = orbit.params;
  p.mu += 2e-4;
  const OrbitProfile moved = solve_periodic_at(orbit, p);
  CHECK(moved.residual_norm <= 1e-10);
  CHECK(level_error(moved) <= 1e-8);
  CHECK(moved.params.mu == doctest::Approx(p.mu).epsilon(1e-14));
  CHECK(moved.period != doctest::Approx(orbit.period).epsilon(1e-12));

  // Re-solving at the same parameters is a fixed point.
  const OrbitProfile same = solve_periodic_at(orbit, orbit.params);
  CHECK(same.period == doctest::Approx(orbit.period).epsilon(1e-9));
}

TEST_CASE("mesh re-adaptation keeps the orbit") {
  const OrbitProfile& orbit = seed_1e3();
  const OrbitProfile re = readapt(orbit);
  CHECK(re.residual_norm <= 1e-10);
  CHECK(re.period == doctest::Approx(orbit.period).epsilon(1e-8));
  CHECK(re.params.mu == orbit.params.mu);
}

TEST_CASE("orbit json round trip") {
  const OrbitProfile& orbit = seed_1e3();
  const std::string text = io::orbit_to_json(orbit, "cafebabe");
  CHECK(text.find("\"config_hash\": \"cafebabe\"") != std::string::npos);
  CHECK(text == io::orbit_to_json(orbit, "cafebabe"));  // bit-stable

  const OrbitProfile parsed = io::orbit_from_json(text);
  CHECK(parsed.params.epsilon == doctest::Approx(orbit.params.epsilon).epsilon(1e-15));
  CHECK(parsed.period == doctest::Approx(orbit.period).epsilon(1e-15));
  const OrbitProfile re = solve_periodic(parsed);
  CHECK(re.residual_norm <= 1e-10);
  CHECK(re.period == doctest::Approx(orbit.period).epsilon(1e-7));

  CHECK_THROWS_AS(io::orbit_from_json("{\"meta\": {}}"), std::invalid_argument);
}

TEST_CASE("branch serialization") {
  Branch branch;
  branch.active_param = "mu";
  branch.fixed_value = 1e-3;
  branch.termination = "target";
  BranchPoint a;
  a.P = 0.0421;
  a.mu = -0.124;
  a.eps = 1e-3;
  a.step = 0;
  BranchPoint b = a;
  b.mu = -0.1245;
  b.step = 1;
  b.fold = true;
  branch.points = {a, b};

  const std::string csv = io::branch_to_csv(branch);
  CHECK(csv.rfind("step,mu,eps,P,lambda,fold\n", 0) == 0);
  CHECK(csv.find(",1\n") != std::string::npos);   // fold flag row
  CHECK(csv == io::branch_to_csv(branch));

  const std::string json_text = io::branch_to_json(branch, "00");
  CHECK(json_text.find("\"termination\": \"target\"") != std::string::npos);
}

TEST_CASE("eval wraps around the period seam") {
  const OrbitProfile& orbit = seed_1e3();
  const State4 x0 = orbit.eval(0.0);
  const State4 x1 = orbit.eval(1.0);
  CHECK(std::abs(x0.u - x1.u) <= 1e-9);
  CHECK(std::abs(x0.w - x1.w) <= 1e-9);
  // H is constant along the interpolated orbit, not only at nodes.
  for (double t : {0.111, 0.333, 0.555, 0.777, 0.999}) {
    CHECK(model::hamiltonian(orbit.eval(t)) ==
          doctest::Approx(orbit.params.mu).epsilon(1e-7));
  }
}
