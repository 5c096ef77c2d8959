#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "lamorbit/periodic.hpp"

// Pseudo-arclength continuation of periodic orbits in mu or (log) eps, with
// secant predictors, adaptive step control, periodic mesh refreshes, online
// fold flagging, and bisection-refined fold localization.

namespace lamorbit {

struct BranchPoint {
  double P = 0.0;
  double mu = 0.0;
  double eps = 0.0;
  double lambda = 0.0;
  double state_norm = 0.0;
  double energy = std::numeric_limits<double>::quiet_NaN();  // set by the energy scan
  int step = 0;
  double tangent_param = 0.0;  // d(param)/ds of the unit secant, log scale for eps
  bool fold = false;
  std::shared_ptr<const OrbitProfile> profile;
};

struct ContinuationOptions {
  ActiveParam active = ActiveParam::Mu;
  double target = std::numeric_limits<double>::quiet_NaN();  // NaN = run to window edge
  double param_min = std::numeric_limits<double>::quiet_NaN();  // defaults per parameter
  double param_max = std::numeric_limits<double>::quiet_NaN();
  double step0 = 1e-2;
  double step_min = 1e-6;
  double step_max = 1e-1;
  int max_steps = 5000;
  int adapt_every = 10;
  int direction = -1;          // initial sign of d(param)/ds
  int stop_after_folds = 0;    // 0 = run to the usual criteria
  int post_fold_steps = 3;
  bvp::NewtonOptions newton = {1e-10, 10, 1.0 / 1024.0, false};
};

struct Branch {
  std::vector<BranchPoint> points;
  std::string active_param;  // "mu" or "eps"
  double fixed_value = 0.0;
  std::string termination;   // target | range | step_underflow | max_steps | fold_stop
  std::string note;
  std::string provenance;
};

/// Continue the branch through `start` (re-converged first). Corrector
/// failures shrink the step; reaching step_min truncates the branch with the
/// reason recorded rather than thrown.
Branch continue_branch(const OrbitProfile& start, const ContinuationOptions& opts);

/// Refine every sign change of tangent_param along the branch down to
/// |d(param)/ds| < 1e-8 by re-converged bisection. Needs >= 3 points.
std::vector<BranchPoint> detect_folds(const Branch& branch,
                                      const bvp::NewtonOptions& newton = {1e-10, 10,
                                                                          1.0 / 1024.0, false});

/// March a profile's parameter to an exact value through fixed-parameter
/// solves with step bisection (no fold crossing).
OrbitProfile retarget_param(const OrbitProfile& profile, ActiveParam active, double value,
                            const bvp::NewtonOptions& newton = {});

/// Interpolate a profile onto another mesh (no re-solve).
OrbitProfile transfer_profile(const OrbitProfile& profile, const bvp::Mesh& mesh);

struct FoldTracePoint {
  double eps = 0.0;
  double mu_star = 0.0;
  double P_star = 0.0;
  bool ok = false;
  std::string note;
};

/// For each eps (descending), obtain a base orbit from `base_orbit`, continue
/// mu toward the left energy boundary, and localize the fold. Failures leave
/// gaps (ok = false) instead of aborting the sweep.
std::vector<FoldTracePoint> trace_fold_in_eps(const std::vector<double>& eps_grid,
                                              const std::function<OrbitProfile(double)>& base_orbit);

}  // namespace lamorbit
