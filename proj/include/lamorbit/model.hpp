#pragma once

#include <array>
#include <utility>

#include "lamorbit/types.hpp"

// Closed-form layer of the model: vector fields on both time scales, the
// conserved Hamiltonian, the critical manifold with its folds, layer-problem
// equilibria and heteroclinics, jump points, and the reduced flows on the
// critical manifold.

namespace lamorbit::model {

/// Slow-scale vector field (u' = w, v' = u, eps w' = z, eps z' = (w^3-w)/2 - v).
State4 vector_field_slow(const State4& x, double epsilon);

/// Fast-scale vector field; equals epsilon * vector_field_slow for epsilon > 0.
State4 vector_field_fast(const State4& x, double epsilon);

/// Conserved energy H = (4u^2 - 8vw - 2w^2 + w^4 - 4z^2) / 8.
double hamiltonian(const State4& x);

/// Gradient of H with respect to (u, v, w, z).
State4 hamiltonian_gradient(const State4& x);

/// Hessian of H (row-major 4x4), used by Newton solvers on the unfolded field.
std::array<double, 16> hamiltonian_hessian(const State4& x);

/// Jacobian of the slow vector field (row-major 4x4).
std::array<double, 16> vector_field_slow_jacobian(const State4& x, double epsilon);

/// d/d(epsilon) of the slow vector field.
State4 vector_field_slow_deps(const State4& x, double epsilon);

/// v-coordinate of the critical manifold: v = (w^3 - w) / 2.
double critical_manifold_v(double w);

struct FoldLines {
  double w_minus;          // -1/sqrt(3)
  double w_plus;           // +1/sqrt(3)
  double tangency_level;   // H value at which slow arcs touch the folds: 1/24
};

/// Fold lines of the critical manifold and the tangency energy level.
FoldLines fold_lines();

struct LayerEquilibria {
  int count = 0;                  // number of distinct real roots (1, 2, or 3)
  std::array<double, 3> w{};      // roots of w^3 - w - 2 v_bar = 0, ascending
  bool has_double_root = false;   // true iff |v_bar| = 1/(3 sqrt(3)) within tol
};

/// Equilibria of the layer problem at frozen v_bar: roots of w^3 - w = 2 v_bar.
/// Closed-form (trigonometric/Cardano) evaluation polished by Newton.
LayerEquilibria layer_equilibria(double v_bar);

struct LayerPoint {
  double w;
  double z;
};

/// Heteroclinic connection of the layer problem at v_bar = 0 on the level
/// H_f = -1/8: w(xi) = dir * tanh(xi/2), z(xi) = dir * (1 - w^2) / 2.
/// dir = +1 runs from w = -1 to w = +1, dir = -1 the mirror image.
LayerPoint heteroclinic_profile(double xi, int dir);

/// Energy of the layer problem at frozen v_bar: -z^2/2 + w^4/8 - w^2/4 - v_bar w.
double layer_hamiltonian(double w, double z, double v_bar);

/// Take-off points of the two fast jumps at level mu:
/// (+sqrt(2 mu + 1/4), 0, +1, 0) and (-sqrt(2 mu + 1/4), 0, -1, 0).
/// Requires mu >= -1/8.
std::pair<State4, State4> jump_points(double mu);

struct Vec2 {
  double x0;
  double x1;
};

/// Reduced flow on the critical manifold in (u, w) coordinates:
/// u' = w, w' = 2u / (3w^2 - 1). Singular on the fold lines.
Vec2 reduced_flow(double u, double w);

/// Desingularized reduced flow: u' = (3w^2 - 1) w, w' = 2u.
/// Time-rescaled by (3w^2 - 1); orientation preserved on the outer branches.
Vec2 reduced_flow_desing(double u, double w);

/// u^2 restricted to the slow arc at level mu: 2 mu + (3w^4 - 2w^2) / 4,
/// evaluated in the factored form (3/4)(w^2 - q_min)(w^2 - q_neg) to stay
/// accurate near its roots.
double slow_arc_u_squared(double mu, double w);

/// Smallest |w| reached by the outer slow arcs at level mu: the root of
/// slow_arc_u_squared in (1/sqrt(3), 1]. Requires mu in (-1/8, 1/24).
double slow_arc_w_min(double mu);

// --- Reduced 3D charts of {H = mu} -----------------------------------------

enum class Chart {
  V,       // solve H = mu for v; coordinates (u, w, z); valid for w != 0
  UPlus,   // solve for u > 0; coordinates (v, w, z)
  UMinus,  // solve for u < 0; coordinates (v, w, z)
};

/// |w| threshold below which the v-chart is considered unreliable.
inline constexpr double kChartSwitchW = 0.2;

struct Vec3 {
  double x0;
  double x1;
  double x2;
};

/// Reconstruct the dependent coordinate and lift a chart point to 4D.
/// Throws std::domain_error at w = 0 (v-chart) or negative radicand (u-charts).
State4 chart_lift(Chart chart, const Vec3& y, double mu);

/// Vector field of the reduced 3D system in the given chart.
/// V-chart: slow-scale rates of (u, w, z) with v eliminated; requires
/// epsilon > 0. U-charts: fast-scale rates of (v, w, z).
Vec3 reduced3_vector_field(Chart chart, const Vec3& y, const Params& p);

}  // namespace lamorbit::model
