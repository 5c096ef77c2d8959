#pragma once

#include "lamorbit/integrate.hpp"
#include "lamorbit/periodic.hpp"

// First periodic orbit from scratch: a symmetric quarter-orbit shooting
// problem started at the layer turning point produces the small fast loop
// just above the double-heteroclinic level, and reflection plus collocation
// re-convergence turns it into an OrbitProfile.  The slow-manifold transit
// solver doubles as an independent check of the slow phase.

namespace lamorbit::seed {

class SeedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SmstBoundaryData {
  double w_far = 0.0;        // pinned entry w (just outside the slow arc)
  double u_far = 0.0;        // entry u on the arc
  double angle_left = 0.0;   // entry free direction vs stable fast direction
  double angle_right = 0.0;  // exit free direction vs unstable fast direction
};

/// Half-transit along the attracting slow manifold, in the chart (u, w, z)
/// with v eliminated through H = mu. Entry pins (u, w); exit pins u = z = 0
/// (the symmetry plane); the transit time is the free scalar.
struct SmstResult {
  bvp::Mesh mesh;
  Eigen::VectorXd states;  // (u, w, z) at nodes and stages, left transit
  double T_s = 0.0;        // slow transit time of the left solve
  double w_L = 0.0;        // landing w of the left transit (near -1)
  double w_R = 0.0;        // landing w of the mirrored transit (near +1)
  double residual = 0.0;
  SmstBoundaryData boundary;
};

SmstResult smst_slow_manifold(double mu, double epsilon);

/// Shoot a quarter orbit from the symmetry plane {u = 0, z = 0} to the
/// plane {v = 0, w = 0}, solving for (v0, w0, T) with w0 < 0. Residuals:
/// v(T), w(T), and H(0, v0, w0, 0) - mu.
struct ShootResult {
  double v0 = 0.0;
  double w0 = 0.0;
  double T_quarter = 0.0;
  double residual = 0.0;
  double jacobian_condition = 0.0;
  int iterations = 0;
  ode::Result trajectory;  // the converged quarter orbit with dense output
};

ShootResult quarter_orbit_shoot(double mu, double epsilon, double v0_guess, double w0_guess,
                                double T_guess);

/// Level the seed loop lives on: -1/8 + 1e-3 up to eps ~ 2.8e-3, then raised
/// along eps^(2/3) with a factor-2 margin over the measured existence wedge
/// mu > -1/8 + 0.025 eps^(2/3) (orbits this close to -1/8 cease to exist at
/// larger eps).
double seed_level(double epsilon);

/// Full pipeline at mu = seed_level(epsilon): quarter shoot from the layer
/// turning point, reflection to a closed loop, collocation re-convergence.
OrbitProfile build_seed_orbit(double epsilon);

}  // namespace lamorbit::seed
