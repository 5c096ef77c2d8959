#pragma once

#include <utility>
#include <vector>

#include "lamorbit/continuation.hpp"

// Averaged variational energy of orbit profiles, branch scans for the
// energy-minimizing period, the asymptotic optimal-period law, and the
// log-log scaling fit.

namespace lamorbit::energy {

/// Mean of z^2 + (w^2 - 1)^2 / 4 + u^2 over one period (in the orbit's own
/// time), by Gauss quadrature on the profile's mesh. The constant state 0
/// gives exactly 1/4.
double functional_density(const OrbitProfile& profile);

struct EnergyRow {
  double P = 0.0;
  double I = 0.0;
  double mu = 0.0;
  double eps = 0.0;
};

struct EnergyScan {
  std::vector<EnergyRow> rows;  // sorted by increasing P
  double P_min = 0.0;
  double I_min = 0.0;
  bool interior = false;  // false: the minimum sits on the sampled boundary
};

/// Fill BranchPoint::energy along the branch and locate the energy-minimizing
/// period, refined by a parabola through the lowest sample and its neighbors.
EnergyScan scan_branch(Branch& branch);

/// Action of one fast jump, 2 * integral of sqrt((w^2-1)^2/4) over [-1, 1],
/// by quadrature; equals 4/3.
double jump_action();

/// Asymptotic energy-minimizing period 2 (6 A0 eps)^(1/3).
double mueller_period(double epsilon);

struct ScalingFit {
  double alpha = 0.0;      // d ln P / d ln eps
  double prefactor = 0.0;  // P ~ prefactor * eps^alpha
  double max_residual = 0.0;
};

/// Least squares of ln P against ln eps; needs >= 4 rows, all positive.
ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& eps_P);

}  // namespace lamorbit::energy
