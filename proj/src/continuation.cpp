#include "lamorbit/continuation.hpp"

#include <cmath>
#include <sstream>

namespace lamorbit {

namespace {

constexpr double kLambdaAccept = 1e-7;  // corrector rejects beyond this drift

double natural_param(const OrbitProfile& p, ActiveParam a) {
  return a == ActiveParam::Mu ? p.params.mu : p.params.epsilon;
}

double to_internal(double natural, ActiveParam a) {
  return a == ActiveParam::LogEps ? std::log(natural) : natural;
}

Params with_param(Params base, ActiveParam a, double natural) {
  if (a == ActiveParam::Mu)
    base.mu = natural;
  else
    base.epsilon = natural;
  return base;
}

Eigen::VectorXd weight_sq(const bvp::Layout& lay) {
  Eigen::VectorXd w(lay.dim());
  const int nst = lay.scalar(0);
  w.head(nst).setConstant(1.0 / nst);
  w.tail(lay.ns).setConstant(1.0);
  return w;
}

double wnorm(const Eigen::VectorXd& wsq, const Eigen::VectorXd& v) {
  return std::sqrt((wsq.array() * v.array() * v.array()).sum());
}

bvp::Problem arclength_problem(std::shared_ptr<const OrbitProfile> ref, Params fixed,
                               ActiveParam active, const Eigen::VectorXd& wsq,
                               const Eigen::VectorXd& dir, const Eigen::VectorXd& y_through) {
  bvp::Problem prob = make_periodic_problem(std::move(ref), fixed, active);
  bvp::DenseCondition dc;
  dc.row = (wsq.array() * dir.array()).matrix();
  dc.rhs = dc.row.dot(y_through);
  prob.dense_conditions.push_back(std::move(dc));
  return prob;
}

bvp::Problem pinned_problem(std::shared_ptr<const OrbitProfile> ref, Params fixed,
                            ActiveParam active, const bvp::Layout& lay, double internal_value) {
  bvp::Problem prob = make_periodic_problem(std::move(ref), fixed, active);
  bvp::DenseCondition dc;
  dc.row = Eigen::VectorXd::Zero(lay.dim());
  dc.row[lay.scalar(2)] = 1.0;
  dc.rhs = internal_value;
  prob.dense_conditions.push_back(std::move(dc));
  return prob;
}

/// Null vector of the system rows, normalized so the last (dense) row maps it
/// to 1, then rescaled to unit weighted norm.
Eigen::VectorXd tangent_bordered(const bvp::Problem& prob, const bvp::Mesh& mesh,
                                 const Eigen::VectorXd& y, const Eigen::VectorXd& wsq) {
  Eigen::VectorXd res;
  std::vector<Eigen::Triplet<double>> trips;
  bvp::assemble(prob, mesh, y, &res, &trips);
  const int dim = static_cast<int>(y.size());
  Eigen::SparseMatrix<double> J(dim, dim);
  J.setFromTriplets(trips.begin(), trips.end());
  J.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(J);
  if (lu.info() != Eigen::Success)
    throw OrbitError("tangent solve hit a singular linearization");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
  e[dim - 1] = 1.0;
  Eigen::VectorXd t = lu.solve(e);
  const double nrm = wnorm(wsq, t);
  if (!(nrm > 0.0) || !t.allFinite())
    throw OrbitError("tangent solve produced a degenerate direction");
  return t / nrm;
}

BranchPoint make_point(const OrbitProfile& p, int step, double tangent_param) {
  BranchPoint bp;
  bp.P = p.period;
  bp.mu = p.params.mu;
  bp.eps = p.params.epsilon;
  bp.lambda = p.lambda;
  bp.state_norm = std::sqrt(p.states.squaredNorm() / p.states.size());
  bp.step = step;
  bp.tangent_param = tangent_param;
  bp.profile = std::make_shared<OrbitProfile>(p);
  return bp;
}

}  // namespace

OrbitProfile transfer_profile(const OrbitProfile& src, const bvp::Mesh& mesh) {
  if (mesh.stages == src.mesh.stages && mesh.nodes == src.mesh.nodes) return src;
  const bvp::Layout lay{4, mesh.stages, mesh.intervals(), 0};
  const auto& gt = bvp::gauss_tables(mesh.stages);
  OrbitProfile out = src;
  out.mesh = mesh;
  out.states.resize(lay.scalar(0));
  double xv[4];
  for (int i = 0; i <= lay.N; ++i) {
    bvp::eval_states(src.mesh, 4, src.states, mesh.nodes[i], xv);
    for (int a = 0; a < 4; ++a) out.states[lay.node(i) + a] = xv[a];
    if (i == lay.N) break;
    const double h = mesh.nodes[i + 1] - mesh.nodes[i];
    for (int j = 0; j < lay.m; ++j) {
      bvp::eval_states(src.mesh, 4, src.states, mesh.nodes[i] + h * gt.c[j], xv);
      for (int a = 0; a < 4; ++a) out.states[lay.stage(i, j) + a] = xv[a];
    }
  }
  return out;
}

Branch continue_branch(const OrbitProfile& start, const ContinuationOptions& opts) {
  const ActiveParam active = opts.active;
  if (active == ActiveParam::None)
    throw OrbitError("continuation needs an active parameter");

  double pmin = opts.param_min, pmax = opts.param_max;
  if (std::isnan(pmin)) pmin = active == ActiveParam::Mu ? kMuMin : kEpsMin;
  if (std::isnan(pmax)) pmax = active == ActiveParam::Mu ? kMuMax : kEpsMax;
  const bool has_target = !std::isnan(opts.target);

  Branch branch;
  branch.active_param = active == ActiveParam::Mu ? "mu" : "eps";
  branch.fixed_value =
      active == ActiveParam::Mu ? start.params.epsilon : start.params.mu;

  bvp::NewtonOptions strict;
  strict.throw_on_fail = true;
  OrbitProfile base = solve_periodic(start, strict);

  bvp::Mesh mesh = base.mesh;
  bvp::Layout lay{4, mesh.stages, mesh.intervals(), 3};
  Eigen::VectorXd wsq = weight_sq(lay);
  auto cur = std::make_shared<OrbitProfile>(base);
  Eigen::VectorXd y_cur = pack_unknowns(*cur, active);
  const Params fixed = cur->params;

  Eigen::VectorXd t;
  {
    const bvp::Problem pinned = pinned_problem(
        cur, fixed, active, lay, to_internal(natural_param(*cur, active), active));
    t = tangent_bordered(pinned, mesh, y_cur, wsq);
  }
  if (t[lay.scalar(2)] != 0.0 && opts.direction * t[lay.scalar(2)] < 0.0) t = -t;
  double tp_prev = t[lay.scalar(2)];

  branch.points.push_back(make_point(*cur, 0, tp_prev));

  double ds = opts.step0;
  double p_prev_nat = natural_param(*cur, active);
  int accepted = 0;
  int fold_countdown = -1;
  int folds_seen = 0;

  const auto clamp_to = [&](double value_nat, const char* why) {
    try {
      OrbitProfile clamped =
          solve_periodic_at(*cur, with_param(fixed, active, value_nat), strict);
      branch.points.back() = make_point(clamped, branch.points.back().step, tp_prev);
    } catch (const std::exception& e) {
      branch.note = std::string("clamp at ") + why + " failed: " + e.what();
    }
  };

  std::string fail_note;
  for (int step = 1; step <= opts.max_steps;) {
    Eigen::VectorXd y_pred = y_cur + ds * t;
    const bvp::Problem prob = arclength_problem(cur, fixed, active, wsq, t, y_pred);
    Eigen::VectorXd y_new = y_pred;
    const bvp::NewtonReport rep = bvp::newton_solve(prob, mesh, y_new, opts.newton);

    bool ok = rep.converged;
    OrbitProfile candidate;
    Eigen::VectorXd secant;
    if (ok) {
      candidate = unpack_unknowns(mesh, y_new, fixed, active);
      candidate.residual_norm = rep.residual;
      candidate.newton_iterations = rep.iterations;
      ok = candidate.period > 0.0 && std::abs(candidate.lambda) <= kLambdaAccept;
      if (!ok) fail_note = "corrector landed outside the admissible set";
    } else {
      fail_note = rep.message;
    }
    if (ok) {
      secant = y_new - y_cur;
      secant /= wnorm(wsq, secant);
      // The arclength plane can cut a tightly curved branch twice; a converged
      // corrector landing behind the current point would retrace the branch.
      if ((wsq.array() * secant.array() * t.array()).sum() <= 0.0) {
        ok = false;
        fail_note = "corrector doubled back along the branch";
      }
    }
    if (!ok) {
      ds *= 0.5;
      if (ds < opts.step_min) {
        branch.termination = "step_underflow";
        branch.note = fail_note;
        return branch;
      }
      continue;
    }

    const double tp_new = secant[lay.scalar(2)];

    BranchPoint bp = make_point(candidate, step, tp_new);
    if (tp_prev != 0.0 && tp_new != 0.0 && tp_prev * tp_new < 0.0) {
      bp.fold = true;
      ++folds_seen;
      if (opts.stop_after_folds > 0 && folds_seen >= opts.stop_after_folds &&
          fold_countdown < 0)
        fold_countdown = opts.post_fold_steps;
    }
    branch.points.push_back(bp);

    cur = std::make_shared<OrbitProfile>(candidate);
    y_cur = y_new;
    t = secant;
    tp_prev = tp_new;
    ++accepted;
    ++step;
    if (rep.iterations <= 3) ds = std::min(ds * 1.3, opts.step_max);

    const double p_nat = natural_param(candidate, active);
    if (has_target && (p_prev_nat - opts.target) * (p_nat - opts.target) <= 0.0) {
      clamp_to(opts.target, "target");
      branch.termination = "target";
      return branch;
    }
    if (p_nat < pmin || p_nat > pmax) {
      clamp_to(p_nat < pmin ? pmin : pmax, "range boundary");
      branch.termination = "range";
      return branch;
    }
    p_prev_nat = p_nat;

    if (fold_countdown > 0 && --fold_countdown == 0) {
      branch.termination = "fold_stop";
      return branch;
    }

    if (opts.adapt_every > 0 && accepted % opts.adapt_every == 0) {
      try {
        OrbitProfile adapted = readapt(*cur, {}, opts.newton);
        if (adapted.mesh.nodes != mesh.nodes) {
          const OrbitProfile prev_nat_profile = *branch.points[branch.points.size() - 2].profile;
          mesh = adapted.mesh;
          lay = bvp::Layout{4, mesh.stages, mesh.intervals(), 3};
          wsq = weight_sq(lay);
          cur = std::make_shared<OrbitProfile>(adapted);
          BranchPoint& last = branch.points.back();
          last.profile = cur;
          last.P = adapted.period;
          last.lambda = adapted.lambda;
          last.state_norm = std::sqrt(adapted.states.squaredNorm() / adapted.states.size());
          y_cur = pack_unknowns(*cur, active);
          const Eigen::VectorXd y_prev =
              pack_unknowns(transfer_profile(prev_nat_profile, mesh), active);
          Eigen::VectorXd sec = y_cur - y_prev;
          const double nr = wnorm(wsq, sec);
          if (nr > 0.0 && sec.allFinite()) {
            t = sec / nr;
            if (tp_prev != 0.0 && t[lay.scalar(2)] * tp_prev < 0.0) t = -t;
            tp_prev = t[lay.scalar(2)];
          } else {
            const bvp::Problem pinned = pinned_problem(
                cur, fixed, active, lay, to_internal(natural_param(*cur, active), active));
            t = tangent_bordered(pinned, mesh, y_cur, wsq);
            if (tp_prev != 0.0 && t[lay.scalar(2)] * tp_prev < 0.0) t = -t;
            tp_prev = t[lay.scalar(2)];
          }
        }
      } catch (const std::exception&) {
        // keep the old mesh; adaptation is advisory
      }
    }
  }
  branch.termination = "max_steps";
  return branch;
}

std::vector<BranchPoint> detect_folds(const Branch& branch, const bvp::NewtonOptions& newton) {
  if (branch.points.size() < 3)
    throw std::invalid_argument("fold detection needs at least 3 branch points");
  const ActiveParam active =
      branch.active_param == "mu" ? ActiveParam::Mu : ActiveParam::LogEps;

  // The secant flag brackets the fold only to within one segment of the two
  // secant midpoints, so probe the flagged segment first and fall back to its
  // predecessor.
  const auto refine = [&](size_t ia, size_t ib, int step, std::vector<BranchPoint>& out) {
    const OrbitProfile& A = *branch.points[ia].profile;
    const OrbitProfile& B = *branch.points[ib].profile;
    const bvp::Mesh& mesh = A.mesh;
    const bvp::Layout lay{4, mesh.stages, mesh.intervals(), 3};
    const Eigen::VectorXd wsq = weight_sq(lay);
    const Params fixed = A.params;
    auto ref = std::make_shared<OrbitProfile>(A);

    const Eigen::VectorXd yA = pack_unknowns(A, active);
    const Eigen::VectorXd yB = pack_unknowns(transfer_profile(B, mesh), active);
    Eigen::VectorXd d = yB - yA;
    d /= wnorm(wsq, d);

    struct Eval {
      bool ok = false;
      double g = 0.0;
      OrbitProfile sol;
    };
    const auto eval = [&](double sigma) {
      Eval ev;
      const Eigen::VectorXd y0 = yA + sigma * (yB - yA);
      const bvp::Problem prob = arclength_problem(ref, fixed, active, wsq, d, y0);
      Eigen::VectorXd y = y0;
      const bvp::NewtonReport rep = bvp::newton_solve(prob, mesh, y, newton);
      if (!rep.converged) return ev;
      try {
        const Eigen::VectorXd t = tangent_bordered(prob, mesh, y, wsq);
        ev.g = t[lay.scalar(2)];
      } catch (const std::exception&) {
        return ev;
      }
      ev.sol = unpack_unknowns(mesh, y, fixed, active);
      ev.sol.residual_norm = rep.residual;
      ev.ok = true;
      return ev;
    };

    Eval ea = eval(0.0), eb = eval(1.0);
    if (!ea.ok || !eb.ok || ea.g * eb.g > 0.0) return false;

    double sa = 0.0, sb = 1.0;
    int last_side = 0;
    Eval best = std::abs(ea.g) < std::abs(eb.g) ? ea : eb;
    for (int it = 0; it < 60 && std::abs(best.g) >= 1e-8; ++it) {
      double sm = sb - eb.g * (sb - sa) / (eb.g - ea.g);
      if (!std::isfinite(sm) || sm <= sa || sm >= sb) sm = 0.5 * (sa + sb);
      Eval em = eval(sm);
      if (!em.ok) em = eval(0.5 * (sa + sb));
      if (!em.ok) break;
      if (std::abs(em.g) < std::abs(best.g)) best = em;
      if (em.g * ea.g < 0.0) {
        sb = sm;
        eb = em;
        if (last_side == -1) ea.g *= 0.5;  // Illinois cut against stagnation
        last_side = -1;
      } else {
        sa = sm;
        ea = em;
        if (last_side == +1) eb.g *= 0.5;
        last_side = +1;
      }
      if (sb - sa < 1e-13) break;
    }
    if (!best.ok) return false;
    BranchPoint bp = make_point(best.sol, step, best.g);
    bp.fold = true;
    out.push_back(std::move(bp));
    return true;
  };

  std::vector<BranchPoint> folds;
  for (size_t i = 1; i < branch.points.size(); ++i) {
    if (!branch.points[i].fold) continue;
    if (!refine(i - 1, i, branch.points[i].step, folds) && i >= 2)
      refine(i - 2, i - 1, branch.points[i].step, folds);
  }
  return folds;
}

OrbitProfile retarget_param(const OrbitProfile& profile, ActiveParam active, double value,
                            const bvp::NewtonOptions& newton) {
  if (active == ActiveParam::None) throw OrbitError("retarget needs an active parameter");
  bvp::NewtonOptions strict = newton;
  strict.throw_on_fail = false;

  OrbitProfile cur = solve_periodic(profile, newton);
  const double chunk0 = active == ActiveParam::Mu ? 2e-3 : 0.25;
  int successes = 0;
  while (true) {
    const double at = to_internal(natural_param(cur, active), active);
    const double goal = to_internal(value, active);
    if (at == goal) return cur;
    double step = goal - at;
    if (std::abs(step) > chunk0) step = std::copysign(chunk0, step);
    while (true) {
      const double trial_internal = (std::abs(goal - at) <= std::abs(step)) ? goal : at + step;
      const double trial_nat =
          active == ActiveParam::LogEps ? std::exp(trial_internal) : trial_internal;
      try {
        OrbitProfile next =
            solve_periodic_at(cur, with_param(cur.params, active, trial_nat), strict);
        if (next.residual_norm <= newton.tol && std::abs(next.lambda) <= kLambdaAccept) {
          cur = std::move(next);
          break;
        }
      } catch (const std::exception&) {
      }
      step *= 0.5;
      if (std::abs(step) < 1e-9 * (1.0 + std::abs(goal)))
        throw OrbitError("parameter march stalled before reaching the target");
    }
    if (++successes % 8 == 0) {
      try {
        cur = readapt(cur);
      } catch (const std::exception&) {
        // keep the current mesh; refreshing it mid-march is best-effort
      }
    }
    if (successes > 400) throw OrbitError("parameter march exceeded its step budget");
  }
}

std::vector<FoldTracePoint> trace_fold_in_eps(
    const std::vector<double>& eps_grid,
    const std::function<OrbitProfile(double)>& base_orbit) {
  std::vector<FoldTracePoint> out;
  for (const double eps : eps_grid) {
    FoldTracePoint tp;
    tp.eps = eps;
    try {
      const OrbitProfile base = base_orbit(eps);
      ContinuationOptions opts;
      opts.active = ActiveParam::Mu;
      opts.direction = -1;
      opts.step0 = 5e-3;
      opts.param_min = kMuMin;
      opts.param_max = base.params.mu + 0.02;
      opts.stop_after_folds = 1;
      opts.post_fold_steps = 3;
      opts.max_steps = 2000;
      const Branch br = continue_branch(base, opts);
      const auto folds = detect_folds(br);
      if (folds.empty()) {
        tp.note = "no fold located (termination: " + br.termination + ")";
      } else {
        tp.mu_star = folds.front().mu;
        tp.P_star = folds.front().P;
        tp.ok = true;
      }
    } catch (const std::exception& e) {
      tp.note = e.what();
    }
    out.push_back(std::move(tp));
  }
  return out;
}

}  // namespace lamorbit
