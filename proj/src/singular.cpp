#include "lamorbit/singular.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>

#include "lamorbit/model.hpp"

namespace lamorbit::model {

double singular_period(double mu) {
  if (!(mu > kMuMin && mu < kMuMax))
    throw std::domain_error("singular_period: mu outside (-1/8, 1/24)");

  const double w_min = slow_arc_w_min(mu);
  const double rt = std::sqrt(1.0 - 24.0 * mu);
  const double q_neg = (1.0 - rt) / 3.0;

  // T0 = 2 * Int_{w_min}^{1} (3w^2 - 1) / sqrt(u^2(w)) dw per arc pair.
  // Substituting w = w_min + t^2 removes the sqrt singularity at w_min:
  // u^2 = (3/4) t^2 (2 w_min + t^2) (w^2 - q_neg), so the integrand is smooth.
  auto f = [&](double t) {
    const double w = w_min + t * t;
    const double w2 = w * w;
    const double g = 0.75 * (2.0 * w_min + t * t) * (w2 - q_neg);
    return 2.0 * (3.0 * w2 - 1.0) / std::sqrt(g);
  };

  const double t_max = std::sqrt(1.0 - w_min);
  const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, 0.0, t_max, 12, 1e-14);
  return 2.0 * integral;
}

SingularOrbit singular_orbit(double mu, int arc_samples, int jump_samples, double xi_max) {
  if (!(mu > kMuMin && mu < kMuMax))
    throw std::domain_error("singular_orbit: mu outside (-1/8, 1/24)");
  if (arc_samples < 3 || jump_samples < 3)
    throw std::domain_error("singular_orbit: need at least 3 samples");

  SingularOrbit so;
  so.mu = mu;
  so.u_jump = std::sqrt(2.0 * mu + 0.25);
  so.w_min = slow_arc_w_min(mu);
  so.T0 = singular_period(mu);

  // Right arc: touch-down (-u_jump, w=1), descend to (0, w_min), ascend to
  // take-off (+u_jump, w=1). Sampled uniformly in w on each leg; the leg
  // split keeps the turning point an exact sample.
  const int half = arc_samples / 2;
  const int down = arc_samples - half;  // includes the turning point
  so.arc_right.reserve(arc_samples);
  for (int i = 0; i < down; ++i) {
    const double w = 1.0 + (so.w_min - 1.0) * static_cast<double>(i) / (down - 1);
    const double u2 = std::max(0.0, slow_arc_u_squared(mu, w));
    so.arc_right.push_back({-std::sqrt(u2), critical_manifold_v(w), w, 0.0});
  }
  for (int i = 1; i <= half; ++i) {
    const double w = so.w_min + (1.0 - so.w_min) * static_cast<double>(i) / half;
    const double u2 = std::max(0.0, slow_arc_u_squared(mu, w));
    so.arc_right.push_back({std::sqrt(u2), critical_manifold_v(w), w, 0.0});
  }

  // Left arc is the S1 image (negate all coordinates), traversed from
  // touch-down (+u_jump, w=-1) to take-off (-u_jump, w=-1).
  so.arc_left.reserve(so.arc_right.size());
  for (const State4& x : so.arc_right) so.arc_left.push_back({-x.u, -x.v, -x.w, -x.z});

  // Jumps at frozen slow variables: up-jump at u = -u_jump, down at +u_jump.
  so.jump_up.reserve(jump_samples);
  so.jump_down.reserve(jump_samples);
  for (int i = 0; i < jump_samples; ++i) {
    const double xi = -xi_max + 2.0 * xi_max * static_cast<double>(i) / (jump_samples - 1);
    const LayerPoint up = heteroclinic_profile(xi, +1);
    const LayerPoint dn = heteroclinic_profile(xi, -1);
    so.jump_up.push_back({-so.u_jump, 0.0, up.w, up.z});
    so.jump_down.push_back({so.u_jump, 0.0, dn.w, dn.z});
  }
  return so;
}

}  // namespace lamorbit::model
