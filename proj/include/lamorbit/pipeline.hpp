#pragma once

#include <map>
#include <string>
#include <vector>

#include "lamorbit/continuation.hpp"
#include "lamorbit/energy.hpp"
#include "lamorbit/seed.hpp"

// Orbit supply chains built from the seed + continuation machinery: cached
// navigation of the (mu, eps) plane, the energy-minimizing scan at one eps,
// and the scaling sweep over an eps grid.

namespace lamorbit::pipeline {

/// Cached orbit supplier. Seeding runs only inside [1e-4, 1e-2]; other eps
/// are reached by continuation in log(eps), other mu by the arclength run
/// through the left fold.
class OrbitSupplier {
 public:
  /// Orbit at exactly (mu, eps).
  OrbitProfile at(double mu, double eps);

  /// Seed-level orbit at exactly eps (eps <= 1e-2; the level follows
  /// seed::seed_level, and eps below 1e-4 is reached by continuation).
  OrbitProfile seed_base(double eps);

 private:
  std::map<double, std::map<double, OrbitProfile>> cache_;  // mu -> eps -> orbit
};

/// Base orbit for a mu run at fixed eps: the seed level for eps <= 1e-2, a
/// wedge-safe staging level above it otherwise.
OrbitProfile mu_run_base(OrbitSupplier& supplier, double eps);

struct MinimizerResult {
  double eps = 0.0;
  double P_min = 0.0;
  double I_min = 0.0;
  double mu_near_min = 0.0;
  bool interior = false;
  bool ok = false;
  std::string note;
  Branch branch;  // the scanned branch (profiles included)
};

/// Continue mu from the seed level through the left fold onto the long-period
/// side until the period safely brackets the expected minimizer, then scan
/// the energy along the branch.
MinimizerResult minimize_energy(OrbitSupplier& supplier, double eps);

struct ScalingSweep {
  std::vector<MinimizerResult> rows;
  energy::ScalingFit fit;    // over the successful rows
  int n_requested = 0;
  int n_ok = 0;
};

/// minimize_energy over a descending eps grid plus the log-log fit.
ScalingSweep scaling_sweep(const std::vector<double>& eps_grid);

}  // namespace lamorbit::pipeline
