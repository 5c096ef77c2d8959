#pragma once

#include <memory>

#include "lamorbit/bvp.hpp"
#include "lamorbit/model.hpp"
#include "lamorbit/types.hpp"

// Periodic orbits as collocation profiles of the rescaled system
//
//   x'(t) = P [ F(x; eps) + lambda grad H(x) ],   t in [0,1],
//
// with periodicity x(1) = x(0), an integral phase anchor against a reference
// profile, and the energy-level pin H(x(0)) = mu. The artificial unfolding
// multiplier lambda makes the conservative problem regular; it vanishes (to
// rounding) at genuine orbits and is carried as a diagnostic.

namespace lamorbit {

class OrbitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OrbitProfile {
  bvp::Mesh mesh;
  Eigen::VectorXd states;  // node and stage states, 4 * (N*(m+1) + 1) entries
  double period = 0.0;
  double lambda = 0.0;
  Params params;
  double residual_norm = 0.0;
  int newton_iterations = 0;

  State4 eval(double t) const;  // t in [0,1]
  State4 rhs(const State4& x) const;
  int state_dim() const { return 4; }
};

/// Which scalar rides along as the third unknown (after P and lambda).
enum class ActiveParam { None, Mu, LogEps };

/// Collocation problem for a periodic orbit. The reference profile supplies
/// the phase anchor; `params` supplies whichever of (mu, eps) is not active.
bvp::Problem make_periodic_problem(std::shared_ptr<const OrbitProfile> reference,
                                   Params params, ActiveParam active);

/// Pack profile data into the unknown vector of make_periodic_problem's
/// problem (states, P, lambda, then the active parameter if any).
Eigen::VectorXd pack_unknowns(const OrbitProfile& profile, ActiveParam active);

/// Inverse of pack_unknowns; params are taken from `fixed` plus the active
/// scalar in y.
OrbitProfile unpack_unknowns(const bvp::Mesh& mesh, const Eigen::VectorXd& y, Params fixed,
                             ActiveParam active);

/// Re-converge a guess profile at its own (or overridden) parameters with
/// both parameters held fixed. The guess itself anchors the phase.
OrbitProfile solve_periodic(const OrbitProfile& guess,
                            const bvp::NewtonOptions& newton = {});
OrbitProfile solve_periodic_at(const OrbitProfile& guess, Params params,
                               const bvp::NewtonOptions& newton = {});

/// Equidistribute the mesh for the current profile and re-converge.
OrbitProfile readapt(const OrbitProfile& profile, const bvp::AdaptOptions& opts = {},
                     const bvp::NewtonOptions& newton = {});

/// Diagnostics.
double closure_error(const OrbitProfile& profile);        // |x(1) - x(0)|_inf
double level_error(const OrbitProfile& profile);          // max_i |H(x_i) - mu|
double hamiltonian_spread(const OrbitProfile& profile);   // max_i H - min_i H
double symmetry_error_s1(const OrbitProfile& profile);    // vs -x(t + 1/2)
double min_w(const OrbitProfile& profile);
double max_w(const OrbitProfile& profile);

}  // namespace lamorbit
