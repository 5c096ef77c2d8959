#include "lamorbit/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace lamorbit::energy {

namespace {

double density(const double* x) {
  const double u = x[0], w = x[2], z = x[3];
  const double well = (w * w - 1.0);
  return z * z + 0.25 * well * well + u * u;
}

}  // namespace

double functional_density(const OrbitProfile& profile) {
  const bvp::Mesh& mesh = profile.mesh;
  const bvp::Layout lay{4, mesh.stages, mesh.intervals(), 0};
  const auto& gt = bvp::gauss_tables(mesh.stages);
  double acc = 0.0;
  for (int i = 0; i < lay.N; ++i) {
    const double h = mesh.nodes[i + 1] - mesh.nodes[i];
    for (int j = 0; j < lay.m; ++j)
      acc += h * gt.b[j] * density(profile.states.data() + lay.stage(i, j));
  }
  return acc;
}

EnergyScan scan_branch(Branch& branch) {
  EnergyScan scan;
  for (auto& bp : branch.points) {
    if (!bp.profile) continue;
    bp.energy = functional_density(*bp.profile);
    scan.rows.push_back(EnergyRow{bp.P, bp.energy, bp.mu, bp.eps});
  }
  if (scan.rows.size() < 3)
    throw std::invalid_argument("energy scan needs at least 3 branch points");
  std::sort(scan.rows.begin(), scan.rows.end(),
            [](const EnergyRow& a, const EnergyRow& b) { return a.P < b.P; });

  size_t k = 0;
  for (size_t i = 1; i < scan.rows.size(); ++i)
    if (scan.rows[i].I < scan.rows[k].I) k = i;

  scan.P_min = scan.rows[k].P;
  scan.I_min = scan.rows[k].I;
  scan.interior = k > 0 && k + 1 < scan.rows.size();
  if (scan.interior) {
    // Newton-form quadratic through the lowest sample and its neighbors.
    const EnergyRow& a = scan.rows[k - 1];
    const EnergyRow& b = scan.rows[k];
    const EnergyRow& c = scan.rows[k + 1];
    const double d1 = (b.I - a.I) / (b.P - a.P);
    const double d2 = (c.I - b.I) / (c.P - b.P);
    const double dd = (d2 - d1) / (c.P - a.P);
    if (dd > 0.0) {
      const double Pv = 0.5 * (a.P + b.P) - d1 / (2.0 * dd);
      if (Pv > a.P && Pv < c.P) {
        scan.P_min = Pv;
        scan.I_min = a.I + d1 * (Pv - a.P) + dd * (Pv - a.P) * (Pv - b.P);
      }
    }
  }
  return scan;
}

double jump_action() {
  const auto f = [](double w) {
    const double well = w * w - 1.0;
    return 2.0 * std::sqrt(0.25 * well * well);
  };
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, -1.0, 1.0, 10, 1e-14);
}

double mueller_period(double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("the period law needs eps > 0");
  return 2.0 * std::cbrt(6.0 * jump_action() * epsilon);
}

ScalingFit scaling_fit(const std::vector<std::pair<double, double>>& eps_P) {
  if (eps_P.size() < 4) throw std::invalid_argument("scaling fit needs at least 4 rows");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [e, P] : eps_P) {
    if (!(e > 0.0) || !(P > 0.0))
      throw std::invalid_argument("scaling fit needs positive eps and P");
    const double x = std::log(e), y = std::log(P);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(eps_P.size());
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("scaling fit needs distinct eps values");
  ScalingFit fit;
  fit.alpha = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - fit.alpha * sx) / n;
  fit.prefactor = std::exp(intercept);
  for (const auto& [e, P] : eps_P)
    fit.max_residual =
        std::max(fit.max_residual, std::abs(std::log(P) - (fit.alpha * std::log(e) + intercept)));
  return fit;
}

}  // namespace lamorbit::energy
