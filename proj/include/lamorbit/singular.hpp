#pragma once

#include <vector>

#include "lamorbit/types.hpp"

// Singular (epsilon = 0) periodic orbits: two slow arcs on the outer branches
// of the critical manifold concatenated with two heteroclinic jumps, plus the
// singular period T0(mu) obtained by quadrature of the reduced flow.

namespace lamorbit::model {

struct SingularOrbit {
  double mu = 0.0;
  double T0 = 0.0;        // singular period (slow time; jumps contribute zero)
  double u_jump = 0.0;    // |u| at take-off/touch-down, sqrt(2 mu + 1/4)
  double w_min = 0.0;     // innermost |w| reached by the slow arcs

  // Slow arcs on {z = 0, v = (w^3 - w)/2}, sampled uniformly in w along each
  // leg (descending then ascending in |w|); right arc has w > 0.
  std::vector<State4> arc_right;
  std::vector<State4> arc_left;

  // Heteroclinic jump profiles at frozen u = -+ u_jump, v = 0, sampled on a
  // uniform xi-grid; jump_up runs w: -1 -> +1 (at u = -u_jump).
  std::vector<State4> jump_up;
  std::vector<State4> jump_down;
};

/// Singular period T0(mu) by adaptive quadrature of the reduced flow along
/// the slow arcs, with the inverse-square-root endpoint resolved by the
/// substitution w = w_min + t^2. Requires mu in (-1/8, 1/24).
double singular_period(double mu);

/// Assemble the singular orbit at level mu. arc_samples points per arc,
/// jump_samples per jump on xi in [-xi_max, xi_max].
SingularOrbit singular_orbit(double mu, int arc_samples = 401, int jump_samples = 401,
                             double xi_max = 40.0);

}  // namespace lamorbit::model
