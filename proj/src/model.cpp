#include "lamorbit/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lamorbit::model {

State4 vector_field_slow(const State4& x, double epsilon) {
  if (!(epsilon > 0.0)) throw std::domain_error("vector_field_slow: epsilon must be > 0");
  const double a = 0.5 * (x.w * x.w * x.w - x.w) - x.v;
  return {x.w, x.u, x.z / epsilon, a / epsilon};
}

State4 vector_field_fast(const State4& x, double epsilon) {
  const double a = 0.5 * (x.w * x.w * x.w - x.w) - x.v;
  return {epsilon * x.w, epsilon * x.u, x.z, a};
}

double hamiltonian(const State4& x) {
  const double w2 = x.w * x.w;
  return (4.0 * x.u * x.u - 8.0 * x.v * x.w - 2.0 * w2 + w2 * w2 - 4.0 * x.z * x.z) / 8.0;
}

State4 hamiltonian_gradient(const State4& x) {
  return {x.u, -x.w, 0.5 * (x.w * x.w * x.w - x.w) - x.v, -x.z};
}

std::array<double, 16> hamiltonian_hessian(const State4& x) {
  std::array<double, 16> h{};
  h[0 * 4 + 0] = 1.0;
  h[1 * 4 + 2] = -1.0;
  h[2 * 4 + 1] = -1.0;
  h[2 * 4 + 2] = 1.5 * x.w * x.w - 0.5;
  h[3 * 4 + 3] = -1.0;
  return h;
}

std::array<double, 16> vector_field_slow_jacobian(const State4& x, double epsilon) {
  std::array<double, 16> j{};
  j[0 * 4 + 2] = 1.0;                                   // d(u')/dw
  j[1 * 4 + 0] = 1.0;                                   // d(v')/du
  j[2 * 4 + 3] = 1.0 / epsilon;                         // d(w')/dz
  j[3 * 4 + 1] = -1.0 / epsilon;                        // d(z')/dv
  j[3 * 4 + 2] = (1.5 * x.w * x.w - 0.5) / epsilon;     // d(z')/dw
  return j;
}

State4 vector_field_slow_deps(const State4& x, double epsilon) {
  const double a = 0.5 * (x.w * x.w * x.w - x.w) - x.v;
  const double e2 = epsilon * epsilon;
  return {0.0, 0.0, -x.z / e2, -a / e2};
}

double critical_manifold_v(double w) { return 0.5 * (w * w * w - w); }

FoldLines fold_lines() {
  const double wf = 1.0 / std::sqrt(3.0);
  return {-wf, wf, 1.0 / 24.0};
}

LayerEquilibria layer_equilibria(double v_bar) {
  // Depressed cubic w^3 + p w + q with p = -1, q = -2 v_bar.
  // Discriminant -4p^3 - 27q^2 = 4 - 108 v_bar^2 vanishes at |v_bar| = 1/(3 sqrt 3).
  const double q = -2.0 * v_bar;
  const double disc = 4.0 - 27.0 * q * q;
  const double tol = 1e-12;

  LayerEquilibria out;
  auto polish = [&](double w) {
    for (int it = 0; it < 3; ++it) {
      const double f = w * w * w - w - 2.0 * v_bar;
      const double df = 3.0 * w * w - 1.0;
      if (std::abs(df) < 1e-8) break;
      w -= f / df;
    }
    return w;
  };

  if (disc > tol) {
    // Three distinct real roots (trigonometric form for p = -1).
    const double theta = std::acos(std::clamp(-1.5 * std::sqrt(3.0) * q, -1.0, 1.0));
    const double r = 2.0 / std::sqrt(3.0);
    double roots[3];
    for (int k = 0; k < 3; ++k)
      roots[k] = r * std::cos((theta - 2.0 * M_PI * k) / 3.0);
    std::sort(roots, roots + 3);
    out.count = 3;
    for (int k = 0; k < 3; ++k) out.w[k] = polish(roots[k]);
  } else if (disc >= -tol) {
    // Double root w_d = 3q/2, simple root w_s = -3q; order ascending.
    const double wd = 1.5 * q;
    const double ws = -3.0 * q;
    out.count = 2;
    out.has_double_root = true;
    out.w[0] = std::min(wd, ws);
    out.w[1] = std::max(wd, ws);
  } else {
    // One real root (hyperbolic form for p = -1 < 0, |q| large).
    const double t = -1.5 * q * std::sqrt(3.0);  // cosh(3 phi) magnitude
    const double s = t >= 0 ? 1.0 : -1.0;
    const double phi = std::acosh(std::abs(t)) / 3.0;
    out.count = 1;
    out.w[0] = polish(s * 2.0 / std::sqrt(3.0) * std::cosh(phi));
  }
  return out;
}

LayerPoint heteroclinic_profile(double xi, int dir) {
  if (dir != 1 && dir != -1) throw std::domain_error("heteroclinic_profile: dir must be +-1");
  const double w = dir * std::tanh(0.5 * xi);
  return {w, dir * 0.5 * (1.0 - w * w)};
}

double layer_hamiltonian(double w, double z, double v_bar) {
  const double w2 = w * w;
  return -0.5 * z * z + w2 * w2 / 8.0 - w2 / 4.0 - v_bar * w;
}

std::pair<State4, State4> jump_points(double mu) {
  const double r = 2.0 * mu + 0.25;
  if (r < 0.0) throw std::domain_error("jump_points: mu must be >= -1/8");
  const double uj = std::sqrt(r);
  return {State4{uj, 0.0, 1.0, 0.0}, State4{-uj, 0.0, -1.0, 0.0}};
}

Vec2 reduced_flow(double u, double w) {
  const double d = 3.0 * w * w - 1.0;
  if (d == 0.0) throw std::domain_error("reduced_flow: evaluated on a fold line");
  return {w, 2.0 * u / d};
}

Vec2 reduced_flow_desing(double u, double w) { return {(3.0 * w * w - 1.0) * w, 2.0 * u}; }

double slow_arc_u_squared(double mu, double w) {
  // 2 mu + (3w^4 - 2w^2)/4 = (3/4)(w^2 - q_min)(w^2 - q_neg) with
  // q_{min,neg} = (1 +- sqrt(1 - 24 mu)) / 3.
  const double s = 1.0 - 24.0 * mu;
  if (s < 0.0) return 2.0 * mu + 0.25 * (3.0 * w * w * w * w - 2.0 * w * w);
  const double rt = std::sqrt(s);
  const double q_min = (1.0 + rt) / 3.0;
  const double q_neg = (1.0 - rt) / 3.0;
  const double w2 = w * w;
  return 0.75 * (w2 - q_min) * (w2 - q_neg);
}

double slow_arc_w_min(double mu) {
  if (!(mu > kMuMin && mu < kMuMax))
    throw std::domain_error("slow_arc_w_min: mu outside (-1/8, 1/24)");
  const double rt = std::sqrt(1.0 - 24.0 * mu);
  return std::sqrt((1.0 + rt) / 3.0);
}

State4 chart_lift(Chart chart, const Vec3& y, double mu) {
  switch (chart) {
    case Chart::V: {
      const double u = y.x0, w = y.x1, z = y.x2;
      if (w == 0.0) throw std::domain_error("chart_lift: v-chart undefined at w = 0");
      const double w2 = w * w;
      const double v = (4.0 * u * u - 8.0 * mu - 2.0 * w2 + w2 * w2 - 4.0 * z * z) / (8.0 * w);
      return {u, v, w, z};
    }
    case Chart::UPlus:
    case Chart::UMinus: {
      const double v = y.x0, w = y.x1, z = y.x2;
      const double w2 = w * w;
      const double rad = 8.0 * v * w + 2.0 * w2 - w2 * w2 + 4.0 * z * z + 8.0 * mu;
      if (rad < 0.0) throw std::domain_error("chart_lift: negative radicand in u-chart");
      const double u = 0.5 * std::sqrt(rad);
      return {chart == Chart::UPlus ? u : -u, v, w, z};
    }
  }
  throw std::logic_error("chart_lift: bad chart");
}

Vec3 reduced3_vector_field(Chart chart, const Vec3& y, const Params& p) {
  const State4 x = chart_lift(chart, y, p.mu);
  switch (chart) {
    case Chart::V: {
      if (!(p.epsilon > 0.0))
        throw std::domain_error("reduced3_vector_field: v-chart needs epsilon > 0");
      // Slow-scale rates of (u, w, z).
      const double a = 0.5 * (x.w * x.w * x.w - x.w) - x.v;
      return {x.w, x.z / p.epsilon, a / p.epsilon};
    }
    case Chart::UPlus:
    case Chart::UMinus: {
      // Fast-scale rates of (v, w, z).
      const double a = 0.5 * (x.w * x.w * x.w - x.w) - x.v;
      return {p.epsilon * x.u, x.z, a};
    }
  }
  throw std::logic_error("reduced3_vector_field: bad chart");
}

}  // namespace lamorbit::model
