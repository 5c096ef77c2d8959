#include "lamorbit/seed.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lamorbit/model.hpp"

namespace lamorbit::seed {

namespace {

double chart_v(const double* x, double mu) {
  const double u = x[0], w = x[1], z = x[2];
  return (4.0 * u * u - 2.0 * w * w + w * w * w * w - 4.0 * z * z - 8.0 * mu) / (8.0 * w);
}

// One half-transit BVP: entry pinned at (u_far, w_far), exit on {u = z = 0},
// free transit time as the scalar unknown.
struct SmstSolve {
  bvp::Mesh mesh;
  Eigen::VectorXd y;
  double T_s = 0.0;
  double w_land = 0.0;
  double residual = 0.0;
};

SmstSolve solve_half_transit(double mu, double epsilon, double w_far, double u_far) {
  bvp::Problem prob;
  prob.n = 3;
  prob.ns = 1;
  prob.f = [mu, epsilon](const double* x, const double* q, double* out) {
    const double T = q[0];
    const double v = chart_v(x, mu);
    out[0] = T * x[1];
    out[1] = T * x[2] / epsilon;
    out[2] = T * (0.5 * (x[1] * x[1] * x[1] - x[1]) - v) / epsilon;
  };
  prob.dfdx = [mu, epsilon](const double* x, const double* q, double* out) {
    const double T = q[0];
    const double u = x[0], w = x[1], z = x[2];
    const double v = chart_v(x, mu);
    const double dv_du = u / w;
    const double dv_dw = 0.5 * (w * w - 1.0) - v / w;
    const double dv_dz = -z / w;
    // rows: d(out_i)/d(u, w, z)
    out[0] = 0.0;
    out[1] = T;
    out[2] = 0.0;
    out[3] = 0.0;
    out[4] = 0.0;
    out[5] = T / epsilon;
    out[6] = T * (-dv_du) / epsilon;
    out[7] = T * (1.5 * w * w - 0.5 - dv_dw) / epsilon;
    out[8] = T * (-dv_dz) / epsilon;
  };
  prob.dfdq = [mu, epsilon](const double* x, const double* q, double* out) {
    const double v = chart_v(x, mu);
    out[0] = x[1];
    out[1] = x[2] / epsilon;
    out[2] = (0.5 * (x[1] * x[1] * x[1] - x[1]) - v) / epsilon;
  };

  bvp::PointCondition entry;
  entry.rows = 2;
  entry.g = [w_far, u_far](const double* x0, const double*, const double*, double* out) {
    out[0] = x0[0] - u_far;
    out[1] = x0[1] - w_far;
  };
  entry.dg = [](const double*, const double*, const double*, double* dgdx0, double* dgdx1,
                double* dgdq) {
    std::fill(dgdx0, dgdx0 + 6, 0.0);
    std::fill(dgdx1, dgdx1 + 6, 0.0);
    dgdq[0] = dgdq[1] = 0.0;
    dgdx0[0] = 1.0;  // row 0: u(0)
    dgdx0[4] = 1.0;  // row 1: w(0)
  };
  prob.point_conditions.push_back(std::move(entry));

  bvp::PointCondition exit_plane;
  exit_plane.rows = 2;
  exit_plane.g = [](const double*, const double* x1, const double*, double* out) {
    out[0] = x1[0];
    out[1] = x1[2];
  };
  exit_plane.dg = [](const double*, const double*, const double*, double* dgdx0, double* dgdx1,
                     double* dgdq) {
    std::fill(dgdx0, dgdx0 + 6, 0.0);
    std::fill(dgdx1, dgdx1 + 6, 0.0);
    dgdq[0] = dgdq[1] = 0.0;
    dgdx1[0] = 1.0;  // row 0: u(1)
    dgdx1[5] = 1.0;  // row 1: z(1)
  };
  prob.point_conditions.push_back(std::move(exit_plane));

  SmstSolve out;
  out.mesh = bvp::Mesh::uniform(60, 4);
  const bvp::Layout lay = bvp::make_layout(prob, out.mesh);
  const auto& gt = bvp::gauss_tables(4);

  // Initial guess along the critical arc, parameterized linearly in u.
  const int side = w_far < 0.0 ? -1 : +1;
  const auto arc_w = [mu, side](double u) {
    const double r = std::sqrt(std::max(0.0, 1.0 - 24.0 * mu + 12.0 * u * u));
    return side * std::sqrt((1.0 + r) / 3.0);
  };
  const auto guess = [&](double t, double* g) {
    const double u = u_far * (1.0 - t);
    const double w = arc_w(u);
    g[0] = u;
    g[1] = w;
    g[2] = epsilon * 2.0 * u / (3.0 * w * w - 1.0);
  };
  double T_guess = 0.0;
  {
    const int K = 200;
    double prev = 1.0 / std::abs(arc_w(u_far));
    for (int k = 1; k <= K; ++k) {
      const double u = u_far * (1.0 - static_cast<double>(k) / K);
      const double cur = 1.0 / std::abs(arc_w(u));
      T_guess += 0.5 * (prev + cur) * std::abs(u_far) / K;
      prev = cur;
    }
  }

  out.y.resize(lay.dim());
  double g3[3];
  for (int i = 0; i <= lay.N; ++i) {
    guess(out.mesh.nodes[i], g3);
    for (int a = 0; a < 3; ++a) out.y[lay.node(i) + a] = g3[a];
    if (i == lay.N) break;
    const double h = out.mesh.nodes[i + 1] - out.mesh.nodes[i];
    for (int j = 0; j < 4; ++j) {
      guess(out.mesh.nodes[i] + h * gt.c[j], g3);
      for (int a = 0; a < 3; ++a) out.y[lay.stage(i, j) + a] = g3[a];
    }
  }
  out.y[lay.scalar(0)] = T_guess;

  bvp::NewtonOptions nopts;
  nopts.tol = 1e-11;
  nopts.throw_on_fail = false;
  bvp::NewtonReport rep = bvp::newton_solve(prob, out.mesh, out.y, nopts);
  if (rep.converged) {
    bvp::AdaptResult ad = bvp::adapt_mesh(prob, out.mesh, out.y);
    if (ad.changed) {
      const bvp::NewtonReport rep2 = bvp::newton_solve(prob, ad.mesh, ad.y, nopts);
      if (rep2.converged) {
        out.mesh = std::move(ad.mesh);
        out.y = std::move(ad.y);
        rep = rep2;
      }
    }
  }
  if (!rep.converged) {
    std::ostringstream os;
    os << "slow-manifold transit failed to converge (mu " << mu << ", eps " << epsilon
       << "): " << rep.message;
    throw SeedError(os.str());
  }
  const bvp::Layout fin{3, out.mesh.stages, out.mesh.intervals(), 1};
  out.T_s = out.y[fin.scalar(0)];
  out.w_land = out.y[fin.node(fin.N) + 1];
  out.residual = rep.residual;
  return out;
}

double fast_rate(double w) { return std::sqrt(std::max(0.0, (3.0 * w * w - 1.0) / 2.0)); }

ode::Rhs slow_field(double epsilon) {
  return [epsilon](double, const double* y, double* dydt) {
    const State4 x{y[0], y[1], y[2], y[3]};
    const State4 f = model::vector_field_slow(x, epsilon);
    dydt[0] = f.u;
    dydt[1] = f.v;
    dydt[2] = f.w;
    dydt[3] = f.z;
  };
}

}  // namespace

SmstResult smst_slow_manifold(double mu, double epsilon) {
  if (!(mu >= kMuMin && mu < kMuMax))
    throw std::invalid_argument("mu outside [-1/8, 1/24) for the slow-manifold transit");
  if (!(epsilon > 0.0 && epsilon <= 1e-1))
    throw std::invalid_argument("eps outside (0, 1e-1] for the slow-manifold transit");

  const double wm = mu > kMuMin ? model::slow_arc_w_min(mu) : 1.0;
  const double w_far = -(wm + 0.05);
  const double u_far = std::sqrt(model::slow_arc_u_squared(mu, w_far));

  const SmstSolve left = solve_half_transit(mu, epsilon, w_far, u_far);
  const SmstSolve right = solve_half_transit(mu, epsilon, -w_far, -u_far);

  SmstResult out;
  out.mesh = left.mesh;
  const bvp::Layout lay{3, left.mesh.stages, left.mesh.intervals(), 1};
  out.states = left.y.head(lay.scalar(0));
  out.T_s = left.T_s;
  out.w_L = left.w_land;
  out.w_R = right.w_land;
  out.residual = std::max(left.residual, right.residual);

  out.boundary.w_far = w_far;
  out.boundary.u_far = u_far;
  const double lam_in = fast_rate(w_far);
  const double lam_out = fast_rate(out.w_L);
  out.boundary.angle_left = std::acos(lam_in / std::sqrt(1.0 + lam_in * lam_in));
  out.boundary.angle_right = std::acos(1.0 / std::sqrt(1.0 + lam_out * lam_out));
  if (out.boundary.angle_left <= 1e-3 || out.boundary.angle_right <= 1e-3)
    throw SeedError("boundary planes graze the fast eigendirections");
  return out;
}

ShootResult quarter_orbit_shoot(double mu, double epsilon, double v0_guess, double w0_guess,
                                double T_guess) {
  if (!(w0_guess < 0.0)) throw std::invalid_argument("quarter shoot expects w0 < 0");
  if (!(T_guess > 0.0)) throw std::invalid_argument("quarter shoot expects T > 0");

  const ode::Rhs f = slow_field(epsilon);
  ode::Config cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  cfg.max_steps = 200000;

  // The crossing w = 0 (upward) must occur within ten period guesses; its
  // time replaces the caller's T guess.
  double T = T_guess;
  {
    const double y0[4] = {0.0, v0_guess, w0_guess, 0.0};
    std::vector<ode::Event> events(1);
    events[0].g = [](double, const double* y) { return y[2]; };
    events[0].direction = +1;
    events[0].terminal = true;
    const ode::Result r = ode::integrate(f, y0, 0.0, 10.0 * T_guess, cfg, events);
    if (r.status != ode::IntegrateStatus::TerminalEvent)
      throw SeedError("the w = 0 crossing was not reached within ten period guesses");
    T = r.events.front().t;
  }

  const auto residual = [&](double v0, double w0, double TT, ode::Result* traj,
                            Eigen::Vector3d* G) {
    const double y0[4] = {0.0, v0, w0, 0.0};
    ode::Result r = ode::integrate(f, y0, 0.0, TT, cfg);
    if (!r.ok()) return false;
    const auto& yf = r.y_final();
    (*G)[0] = yf[1];
    (*G)[1] = yf[2];
    (*G)[2] = model::hamiltonian(State4{0.0, v0, w0, 0.0}) - mu;
    if (traj) *traj = std::move(r);
    return true;
  };

  ShootResult out;
  double v0 = v0_guess, w0 = w0_guess;
  Eigen::Vector3d G;
  if (!residual(v0, w0, T, &out.trajectory, &G))
    throw SeedError("quarter-orbit integration broke down at the initial guess");
  double gnorm = G.cwiseAbs().maxCoeff();

  const int max_iter = 30;
  for (int iter = 0; iter < max_iter && gnorm > 1e-10; ++iter) {
    Eigen::Matrix3d J;
    Eigen::Vector3d Gp, Gm;
    const double dv = 1e-6 * (1.0 + std::abs(v0));
    const double dw = 1e-6 * (1.0 + std::abs(w0));
    const double dT = 1e-6 * (1.0 + std::abs(T));
    if (!residual(v0 + dv, w0, T, nullptr, &Gp) || !residual(v0 - dv, w0, T, nullptr, &Gm))
      throw SeedError("quarter-orbit integration broke down while differencing");
    J.col(0) = (Gp - Gm) / (2.0 * dv);
    if (!residual(v0, w0 + dw, T, nullptr, &Gp) || !residual(v0, w0 - dw, T, nullptr, &Gm))
      throw SeedError("quarter-orbit integration broke down while differencing");
    J.col(1) = (Gp - Gm) / (2.0 * dw);
    if (!residual(v0, w0, T + dT, nullptr, &Gp) || !residual(v0, w0, T - dT, nullptr, &Gm))
      throw SeedError("quarter-orbit integration broke down while differencing");
    J.col(2) = (Gp - Gm) / (2.0 * dT);

    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.jacobian_condition =
        svd.singularValues()(0) / std::max(svd.singularValues()(2), 1e-300);
    const Eigen::Vector3d delta = svd.solve(G);

    double alpha = 1.0;
    bool accepted = false;
    for (int half = 0; half <= 8; ++half, alpha *= 0.5) {
      const double v0n = v0 - alpha * delta[0];
      const double w0n = w0 - alpha * delta[1];
      const double Tn = T - alpha * delta[2];
      if (!(Tn > 0.0) || Tn > 10.0 * T_guess || !(w0n < 0.0)) continue;
      Eigen::Vector3d Gn;
      ode::Result traj;
      if (!residual(v0n, w0n, Tn, &traj, &Gn)) continue;
      if (Gn.cwiseAbs().maxCoeff() < gnorm) {
        v0 = v0n;
        w0 = w0n;
        T = Tn;
        G = Gn;
        gnorm = Gn.cwiseAbs().maxCoeff();
        out.trajectory = std::move(traj);
        accepted = true;
        break;
      }
    }
    out.iterations = iter + 1;
    if (!accepted) break;
  }

  if (gnorm > 1e-8) {
    std::ostringstream os;
    os << "quarter-orbit shoot stalled at residual " << gnorm << " (mu " << mu << ", eps "
       << epsilon << ")";
    throw SeedError(os.str());
  }
  out.v0 = v0;
  out.w0 = w0;
  out.T_quarter = T;
  out.residual = gnorm;
  return out;
}

double seed_level(double epsilon) {
  return kMuMin + std::max(1e-3, 0.05 * std::cbrt(epsilon * epsilon));
}

OrbitProfile build_seed_orbit(double epsilon) {
  if (!(epsilon >= 1e-4 && epsilon <= 1e-2))
    throw std::invalid_argument("seeding works on eps in [1e-4, 1e-2]; continue from a "
                                "seeded orbit outside this window");
  const double mu = seed_level(epsilon);

  // Left turning point of the layer level set {H(0, 0, w, 0) = mu}: the
  // level residual vanishes there exactly, and it sits far enough from the
  // saddles at w = +-1 that the shooting sensitivities stay moderate.
  const double w_t = -std::sqrt(1.0 - std::sqrt(1.0 + 8.0 * mu));
  ShootResult shot = quarter_orbit_shoot(mu, epsilon, 0.0, w_t, 10.0 * epsilon);

  const double T = shot.T_quarter;
  const double P = 4.0 * T;
  const auto orbit_at = [&](double tau) {
    // Quarter trajectory reflected through Fix(R2) = {v = w = 0} at tau = 1/4
    // and Fix(R) = {u = z = 0} at tau = 1/2.
    double s = tau - std::floor(tau);
    double q[4];
    if (s <= 0.25) {
      shot.trajectory.eval(std::min(s * P, T), q);
    } else if (s <= 0.5) {
      shot.trajectory.eval(std::min((0.5 - s) * P, T), q);
      q[1] = -q[1];
      q[2] = -q[2];
    } else if (s <= 0.75) {
      shot.trajectory.eval(std::min((s - 0.5) * P, T), q);
      for (double& c : q) c = -c;
    } else {
      shot.trajectory.eval(std::min((1.0 - s) * P, T), q);
      q[0] = -q[0];
      q[3] = -q[3];
    }
    return State4{q[0], q[1], q[2], q[3]};
  };

  OrbitProfile guess;
  guess.mesh = bvp::Mesh::uniform(240, 4);
  guess.period = P;
  guess.lambda = 0.0;
  guess.params = Params{mu, epsilon};
  const bvp::Layout lay{4, 4, 240, 0};
  const auto& gt = bvp::gauss_tables(4);
  guess.states.resize(lay.scalar(0));
  for (int i = 0; i <= lay.N; ++i) {
    const State4 x = orbit_at(guess.mesh.nodes[i]);
    for (int a = 0; a < 4; ++a) guess.states[lay.node(i) + a] = x[a];
    if (i == lay.N) break;
    const double h = guess.mesh.nodes[i + 1] - guess.mesh.nodes[i];
    for (int j = 0; j < 4; ++j) {
      const State4 x2 = orbit_at(guess.mesh.nodes[i] + h * gt.c[j]);
      for (int a = 0; a < 4; ++a) guess.states[lay.stage(i, j) + a] = x2[a];
    }
  }

  try {
    OrbitProfile orbit = solve_periodic(guess);
    orbit = readapt(orbit);
    orbit = readapt(orbit);
    return orbit;
  } catch (const std::exception& e) {
    throw SeedError(std::string("seed re-convergence failed: ") + e.what());
  }
}

}  // namespace lamorbit::seed
