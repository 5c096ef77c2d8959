#include "lamorbit/periodic.hpp"

#include <cmath>

namespace lamorbit {

namespace {

using model::hamiltonian;
using model::hamiltonian_gradient;
using model::hamiltonian_hessian;
using model::vector_field_slow;
using model::vector_field_slow_jacobian;

int scalar_count(ActiveParam active) { return active == ActiveParam::None ? 2 : 3; }

Params resolve_params(const double* q, Params fixed, ActiveParam active) {
  Params p = fixed;
  if (active == ActiveParam::Mu) p.mu = q[2];
  if (active == ActiveParam::LogEps) p.epsilon = std::exp(q[2]);
  return p;
}

}  // namespace

State4 OrbitProfile::eval(double t) const {
  double out[4];
  bvp::eval_states(mesh, 4, states, t, out);
  return State4{out[0], out[1], out[2], out[3]};
}

State4 OrbitProfile::rhs(const State4& x) const {
  const State4 f = vector_field_slow(x, params.epsilon);
  const State4 g = hamiltonian_gradient(x);
  return State4{period * (f.u + lambda * g.u), period * (f.v + lambda * g.v),
                period * (f.w + lambda * g.w), period * (f.z + lambda * g.z)};
}

bvp::Problem make_periodic_problem(std::shared_ptr<const OrbitProfile> reference, Params params,
                                   ActiveParam active) {
  if (!reference) throw OrbitError("periodic problem needs a phase reference");
  bvp::Problem prob;
  prob.n = 4;
  prob.ns = scalar_count(active);

  prob.f = [params, active](const double* x, const double* q, double* out) {
    const Params pr = resolve_params(q, params, active);
    const State4 s{x[0], x[1], x[2], x[3]};
    const State4 f = vector_field_slow(s, pr.epsilon);
    const State4 g = hamiltonian_gradient(s);
    const double P = q[0], lam = q[1];
    out[0] = P * (f.u + lam * g.u);
    out[1] = P * (f.v + lam * g.v);
    out[2] = P * (f.w + lam * g.w);
    out[3] = P * (f.z + lam * g.z);
  };
  prob.dfdx = [params, active](const double* x, const double* q, double* out) {
    const Params pr = resolve_params(q, params, active);
    const State4 s{x[0], x[1], x[2], x[3]};
    const auto Df = vector_field_slow_jacobian(s, pr.epsilon);
    const auto Hh = hamiltonian_hessian(s);
    const double P = q[0], lam = q[1];
    for (int i = 0; i < 16; ++i) out[i] = P * (Df[i] + lam * Hh[i]);
  };
  prob.dfdq = [params, active](const double* x, const double* q, double* out) {
    const Params pr = resolve_params(q, params, active);
    const State4 s{x[0], x[1], x[2], x[3]};
    const State4 f = vector_field_slow(s, pr.epsilon);
    const State4 g = hamiltonian_gradient(s);
    const double P = q[0], lam = q[1];
    const int ns = active == ActiveParam::None ? 2 : 3;
    const double fq[4] = {f.u + lam * g.u, f.v + lam * g.v, f.w + lam * g.w, f.z + lam * g.z};
    const double gv[4] = {g.u, g.v, g.w, g.z};
    for (int a = 0; a < 4; ++a) {
      out[a * ns + 0] = fq[a];
      out[a * ns + 1] = P * gv[a];
      if (ns == 3) {
        if (active == ActiveParam::LogEps) {
          // The 1/eps components scale as -1 per unit of log(eps).
          out[a * ns + 2] = (a >= 2) ? -P * f[a] : 0.0;
        } else {
          out[a * ns + 2] = 0.0;
        }
      }
    }
  };

  bvp::PointCondition periodicity;
  periodicity.rows = 4;
  periodicity.g = [](const double* x0, const double* x1, const double*, double* out) {
    for (int a = 0; a < 4; ++a) out[a] = x1[a] - x0[a];
  };
  periodicity.dg = [active](const double*, const double*, const double*, double* dgdx0,
                            double* dgdx1, double* dgdq) {
    const int ns = scalar_count(active);
    std::fill(dgdx0, dgdx0 + 16, 0.0);
    std::fill(dgdx1, dgdx1 + 16, 0.0);
    std::fill(dgdq, dgdq + 4 * ns, 0.0);
    for (int a = 0; a < 4; ++a) {
      dgdx0[a * 4 + a] = -1.0;
      dgdx1[a * 4 + a] = 1.0;
    }
  };
  prob.point_conditions.push_back(std::move(periodicity));

  bvp::PointCondition level;
  level.rows = 1;
  level.g = [params, active](const double* x0, const double*, const double* q, double* out) {
    const Params pr = resolve_params(q, params, active);
    out[0] = hamiltonian(State4{x0[0], x0[1], x0[2], x0[3]}) - pr.mu;
  };
  level.dg = [active](const double* x0, const double*, const double*, double* dgdx0,
                      double* dgdx1, double* dgdq) {
    const int ns = scalar_count(active);
    const State4 g = hamiltonian_gradient(State4{x0[0], x0[1], x0[2], x0[3]});
    dgdx0[0] = g.u;
    dgdx0[1] = g.v;
    dgdx0[2] = g.w;
    dgdx0[3] = g.z;
    std::fill(dgdx1, dgdx1 + 4, 0.0);
    std::fill(dgdq, dgdq + ns, 0.0);
    if (active == ActiveParam::Mu) dgdq[2] = -1.0;
  };
  prob.point_conditions.push_back(std::move(level));

  // Integral phase anchor <x - x_ref, x_ref'> against the reference orbit,
  // normalized by the reference's mean-square speed.
  auto ref = reference;
  double speed_sq = 0.0;
  {
    const auto& gt = bvp::gauss_tables(ref->mesh.stages);
    for (int i = 0; i < ref->mesh.intervals(); ++i) {
      const double h = ref->mesh.nodes[i + 1] - ref->mesh.nodes[i];
      for (int j = 0; j < ref->mesh.stages; ++j) {
        const State4 x = ref->eval(ref->mesh.nodes[i] + h * gt.c[j]);
        const State4 d = ref->rhs(x);
        speed_sq += h * gt.b[j] *
                    (d.u * d.u + d.v * d.v + d.w * d.w + d.z * d.z);
      }
    }
  }
  const double inv_norm = 1.0 / std::max(speed_sq, 1e-300);

  bvp::IntegralCondition phase;
  phase.phi = [ref, inv_norm](double t, const double* x, const double*) {
    const State4 xr = ref->eval(t);
    const State4 dr = ref->rhs(xr);
    return inv_norm * ((x[0] - xr.u) * dr.u + (x[1] - xr.v) * dr.v + (x[2] - xr.w) * dr.w +
                       (x[3] - xr.z) * dr.z);
  };
  phase.dphidx = [ref, inv_norm](double t, const double*, const double*, double* out) {
    const State4 xr = ref->eval(t);
    const State4 dr = ref->rhs(xr);
    out[0] = inv_norm * dr.u;
    out[1] = inv_norm * dr.v;
    out[2] = inv_norm * dr.w;
    out[3] = inv_norm * dr.z;
  };
  phase.dphidq = nullptr;
  prob.integral_conditions.push_back(std::move(phase));

  return prob;
}

Eigen::VectorXd pack_unknowns(const OrbitProfile& profile, ActiveParam active) {
  const bvp::Layout lay{4, profile.mesh.stages, profile.mesh.intervals(), scalar_count(active)};
  Eigen::VectorXd y(lay.dim());
  y.head(profile.states.size()) = profile.states;
  y[lay.scalar(0)] = profile.period;
  y[lay.scalar(1)] = profile.lambda;
  if (active == ActiveParam::Mu) y[lay.scalar(2)] = profile.params.mu;
  if (active == ActiveParam::LogEps) y[lay.scalar(2)] = std::log(profile.params.epsilon);
  return y;
}

OrbitProfile unpack_unknowns(const bvp::Mesh& mesh, const Eigen::VectorXd& y, Params fixed,
                             ActiveParam active) {
  const bvp::Layout lay{4, mesh.stages, mesh.intervals(), scalar_count(active)};
  OrbitProfile out;
  out.mesh = mesh;
  out.states = y.head(lay.scalar(0));
  out.period = y[lay.scalar(0)];
  out.lambda = y[lay.scalar(1)];
  out.params = fixed;
  if (active == ActiveParam::Mu) out.params.mu = y[lay.scalar(2)];
  if (active == ActiveParam::LogEps) out.params.epsilon = std::exp(y[lay.scalar(2)]);
  return out;
}

OrbitProfile solve_periodic_at(const OrbitProfile& guess, Params params,
                               const bvp::NewtonOptions& newton) {
  auto ref = std::make_shared<OrbitProfile>(guess);
  const bvp::Problem prob = make_periodic_problem(ref, params, ActiveParam::None);
  Eigen::VectorXd y = pack_unknowns(guess, ActiveParam::None);
  const bvp::NewtonReport rep = bvp::newton_solve(prob, guess.mesh, y, newton);
  OrbitProfile out = unpack_unknowns(guess.mesh, y, params, ActiveParam::None);
  out.residual_norm = rep.residual;
  out.newton_iterations = rep.iterations;
  if (out.period <= 0.0) throw OrbitError("periodic solve landed on a non-positive period");
  return out;
}

OrbitProfile solve_periodic(const OrbitProfile& guess, const bvp::NewtonOptions& newton) {
  return solve_periodic_at(guess, guess.params, newton);
}

OrbitProfile readapt(const OrbitProfile& profile, const bvp::AdaptOptions& opts,
                     const bvp::NewtonOptions& newton) {
  auto ref = std::make_shared<OrbitProfile>(profile);
  const bvp::Problem prob = make_periodic_problem(ref, profile.params, ActiveParam::None);
  const Eigen::VectorXd y = pack_unknowns(profile, ActiveParam::None);
  const bvp::AdaptResult ad = bvp::adapt_mesh(prob, profile.mesh, y, opts);
  if (!ad.changed) return profile;
  OrbitProfile moved = unpack_unknowns(ad.mesh, ad.y, profile.params, ActiveParam::None);
  return solve_periodic(moved, newton);
}

double closure_error(const OrbitProfile& profile) {
  const State4 a = profile.eval(0.0);
  const State4 b = profile.eval(1.0);
  return norm_inf(b - a);
}

double level_error(const OrbitProfile& profile) {
  const bvp::Layout lay{4, profile.mesh.stages, profile.mesh.intervals(), 0};
  double err = 0.0;
  for (int i = 0; i <= lay.N; ++i) {
    const State4 x{profile.states[lay.node(i) + 0], profile.states[lay.node(i) + 1],
                   profile.states[lay.node(i) + 2], profile.states[lay.node(i) + 3]};
    err = std::max(err, std::abs(hamiltonian(x) - profile.params.mu));
  }
  return err;
}

double hamiltonian_spread(const OrbitProfile& profile) {
  const bvp::Layout lay{4, profile.mesh.stages, profile.mesh.intervals(), 0};
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i <= lay.N; ++i) {
    const State4 x{profile.states[lay.node(i) + 0], profile.states[lay.node(i) + 1],
                   profile.states[lay.node(i) + 2], profile.states[lay.node(i) + 3]};
    const double h = hamiltonian(x);
    lo = std::min(lo, h);
    hi = std::max(hi, h);
  }
  return hi - lo;
}

double symmetry_error_s1(const OrbitProfile& profile) {
  double err = 0.0;
  const int samples = 256;
  for (int k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / samples;
    double s = t + 0.5;
    if (s >= 1.0) s -= 1.0;
    const State4 a = profile.eval(t);
    const State4 b = profile.eval(s);
    err = std::max(err, norm_inf(a + b));
  }
  return err;
}

double min_w(const OrbitProfile& profile) {
  const bvp::Layout lay{4, profile.mesh.stages, profile.mesh.intervals(), 0};
  double lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= lay.N; ++i) lo = std::min(lo, profile.states[lay.node(i) + 2]);
  for (int i = 0; i < lay.N; ++i)
    for (int j = 0; j < lay.m; ++j) lo = std::min(lo, profile.states[lay.stage(i, j) + 2]);
  return lo;
}

double max_w(const OrbitProfile& profile) {
  const bvp::Layout lay{4, profile.mesh.stages, profile.mesh.intervals(), 0};
  double hi = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= lay.N; ++i) hi = std::max(hi, profile.states[lay.node(i) + 2]);
  for (int i = 0; i < lay.N; ++i)
    for (int j = 0; j < lay.m; ++j) hi = std::max(hi, profile.states[lay.stage(i, j) + 2]);
  return hi;
}

}  // namespace lamorbit
