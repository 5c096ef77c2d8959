#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "lamorbit/continuation.hpp"
#include "lamorbit/periodic.hpp"
#include "lamorbit/seed.hpp"

using namespace lamorbit;

namespace {

const OrbitProfile& seed_1e3() {
  static const OrbitProfile orbit = seed::build_seed_orbit(1e-3);
  return orbit;
}

}  // namespace

TEST_CASE("short mu run reaches its target exactly") {
  ContinuationOptions opts;
  opts.active = ActiveParam::Mu;
  opts.direction = -1;
  opts.target = -0.1245;
  opts.step0 = 1e-3;
  const Branch branch = continue_branch(seed_1e3(), opts);
  REQUIRE(!branch.points.empty());
  CHECK(branch.termination == "target");
  CHECK(branch.active_param == "mu");
  CHECK(branch.points.back().mu == doctest::Approx(-0.1245).epsilon(1e-10));
  for (const BranchPoint& bp : branch.points) {
    CHECK(std::abs(bp.lambda) <= 1e-7);
    CHECK(bp.P > 0.0);
    CHECK(bp.eps == doctest::Approx(1e-3).epsilon(1e-14));
    REQUIRE(bp.profile);
  }
  // Monotone descent on this fold-free stretch.
  for (std::size_t i = 1; i < branch.points.size(); ++i) {
    CHECK(branch.points[i].mu < branch.points[i - 1].mu + 1e-14);
  }
}

TEST_CASE("branch points re-converge onto themselves") {
  ContinuationOptions opts;
  opts.active = ActiveParam::Mu;
  opts.direction = -1;
  opts.target = -0.1244;
  opts.step0 = 1e-3;
  const Branch branch = continue_branch(seed_1e3(), opts);
  REQUIRE(branch.points.size() >= 3);
  const BranchPoint& mid = branch.points[branch.points.size() / 2];
  const OrbitProfile again = solve_periodic_at(*mid.profile, mid.profile->params);
  CHECK(again.period == doctest::Approx(mid.P).epsilon(1e-6));
}

TEST_CASE("eps retargeting marches to the requested value") {
  const OrbitProfile moved = retarget_param(seed_1e3(), ActiveParam::LogEps, 5e-4);
  CHECK(moved.params.epsilon == doctest::Approx(5e-4).epsilon(1e-12));
  CHECK(moved.params.mu == doctest::Approx(seed_1e3().params.mu).epsilon(1e-14));
  CHECK(moved.residual_norm <= 1e-10);
  CHECK(std::abs(moved.lambda) <= 1e-7);
  // The fast loop shrinks with eps.
  CHECK(moved.period < seed_1e3().period);
}

TEST_CASE("mu retargeting refuses to cross the admissible window") {
  CHECK_THROWS(retarget_param(seed_1e3(), ActiveParam::Mu, -0.2));
}

TEST_CASE("profile transfer preserves the curve") {
  const OrbitProfile& orbit = seed_1e3();
  bvp::Mesh coarse = bvp::Mesh::uniform(64, orbit.mesh.stages);
  const OrbitProfile moved = transfer_profile(orbit, coarse);
  CHECK(moved.mesh.intervals() == 64);
  CHECK(moved.period == doctest::Approx(orbit.period).epsilon(1e-14));
  for (double t : {0.0, 0.25, 0.6, 0.93}) {
    const State4 a = orbit.eval(t);
    const State4 b = moved.eval(t);
    CHECK(std::abs(a.u - b.u) <= 1e-4);
    CHECK(std::abs(a.w - b.w) <= 1e-4);
  }
}

TEST_CASE("window clamp terminates with range") {
  ContinuationOptions opts;
  opts.active = ActiveParam::Mu;
  opts.direction = -1;
  opts.step0 = 1e-3;
  opts.param_min = -0.1244;  // artificial window edge just below the seed level
  opts.param_max = -0.1230;
  const Branch branch = continue_branch(seed_1e3(), opts);
  REQUIRE(!branch.points.empty());
  CHECK(branch.termination == "range");
  CHECK(branch.points.back().mu == doctest::Approx(-0.1244).epsilon(1e-9));
}

TEST_CASE("max_steps termination is reported") {
  ContinuationOptions opts;
  opts.active = ActiveParam::Mu;
  opts.direction = -1;
  opts.step0 = 1e-4;
  opts.step_max = 1e-4;
  opts.max_steps = 3;
  const Branch branch = continue_branch(seed_1e3(), opts);
  CHECK(branch.termination == "max_steps");
  CHECK(branch.points.size() == 4);  // base + three steps
}
