#include "lamorbit/bvp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace lamorbit::bvp {

namespace {

// Legendre polynomial value and derivative on [-1,1] by recurrence.
void legendre(int m, double x, double* p, double* dp) {
  double p0 = 1.0, p1 = x;
  if (m == 0) {
    *p = p0;
    *dp = 0.0;
    return;
  }
  for (int k = 2; k <= m; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  *p = p1;
  *dp = m * (x * p1 - p0) / (x * x - 1.0);
}

GaussTables build_tables(int m) {
  GaussTables t;
  t.m = m;
  t.c.resize(m);
  t.b.resize(m);

  for (int i = 0; i < m; ++i) {
    // Chebyshev-based initial guess, then Newton on P_m.
    double x = std::cos(M_PI * (i + 0.75) / (m + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p, dp;
      legendre(m, x, &p, &dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p, dp;
    legendre(m, x, &p, &dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map from [-1,1] to [0,1]; cos ordering gives descending roots.
    t.c[m - 1 - i] = 0.5 * (x + 1.0);
    t.b[m - 1 - i] = 0.5 * w;
  }

  const auto lagrange = [&](int j, double theta) {
    double v = 1.0;
    for (int k = 0; k < m; ++k) {
      if (k == j) continue;
      v *= (theta - t.c[k]) / (t.c[j] - t.c[k]);
    }
    return v;
  };

  // A[j][k] = int_0^{c_j} ell_k; m-point Gauss on [0,c_j] is exact for the
  // degree-(m-1) basis polynomials.
  t.A.assign(m, std::vector<double>(m, 0.0));
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      double s = 0.0;
      for (int r = 0; r < m; ++r) s += t.b[r] * lagrange(k, t.c[j] * t.c[r]);
      t.A[j][k] = t.c[j] * s;
    }
  }

  t.interp_abscissae.resize(m + 1);
  t.interp_abscissae[0] = 0.0;
  for (int j = 0; j < m; ++j) t.interp_abscissae[j + 1] = t.c[j];
  t.interp_wbary.resize(m + 1);
  for (int r = 0; r <= m; ++r) {
    double w = 1.0;
    for (int s = 0; s <= m; ++s) {
      if (s == r) continue;
      w /= (t.interp_abscissae[r] - t.interp_abscissae[s]);
    }
    t.interp_wbary[r] = w;
  }
  return t;
}

double inf_norm(const Eigen::VectorXd& v) {
  double n = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) return std::numeric_limits<double>::infinity();
    n = std::max(n, std::abs(v[i]));
  }
  return n;
}

int find_interval(const std::vector<double>& nodes, double t) {
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
  int i = static_cast<int>(it - nodes.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(nodes.size()) - 2);
}

}  // namespace

void GaussTables::interp_basis(double theta, double* out) const {
  const int np = m + 1;
  for (int r = 0; r < np; ++r) {
    if (std::abs(theta - interp_abscissae[r]) < 1e-14) {
      std::fill(out, out + np, 0.0);
      out[r] = 1.0;
      return;
    }
  }
  double denom = 0.0;
  for (int r = 0; r < np; ++r) {
    out[r] = interp_wbary[r] / (theta - interp_abscissae[r]);
    denom += out[r];
  }
  for (int r = 0; r < np; ++r) out[r] /= denom;
}

const GaussTables& gauss_tables(int m) {
  if (m < 2 || m > 7) throw AssemblyError("collocation degree must be in [2,7]");
  static std::map<int, GaussTables> cache;
  auto it = cache.find(m);
  if (it == cache.end()) it = cache.emplace(m, build_tables(m)).first;
  return it->second;
}

void Mesh::validate() const {
  if (stages < 2 || stages > 7) throw AssemblyError("mesh stages must be in [2,7]");
  if (intervals() < 10) throw AssemblyError("mesh needs at least 10 intervals");
  if (nodes.front() != 0.0 || nodes.back() != 1.0)
    throw AssemblyError("mesh must span [0,1]");
  for (size_t i = 1; i < nodes.size(); ++i)
    if (!(nodes[i] > nodes[i - 1])) throw AssemblyError("mesh nodes must be increasing");
}

Mesh Mesh::uniform(int intervals, int stages) {
  Mesh mesh;
  mesh.stages = stages;
  mesh.nodes.resize(intervals + 1);
  for (int i = 0; i <= intervals; ++i)
    mesh.nodes[i] = static_cast<double>(i) / intervals;
  mesh.nodes.back() = 1.0;
  return mesh;
}

int Problem::condition_rows() const {
  int rows = 0;
  for (const auto& pc : point_conditions) rows += pc.rows;
  rows += static_cast<int>(integral_conditions.size());
  rows += static_cast<int>(dense_conditions.size());
  return rows;
}

Layout make_layout(const Problem& p, const Mesh& mesh) {
  mesh.validate();
  if (p.n <= 0 || !p.f || !p.dfdx) throw AssemblyError("problem lacks dimension or rates");
  if (p.ns > 0 && !p.dfdq) throw AssemblyError("scalar unknowns require a scalar-rate Jacobian");
  if (p.condition_rows() != p.n + p.ns) {
    std::ostringstream os;
    os << "condition count " << p.condition_rows() << " != n + ns = " << p.n + p.ns;
    throw AssemblyError(os.str());
  }
  return Layout{p.n, mesh.stages, mesh.intervals(), p.ns};
}

namespace {

// Central-difference Jacobian of a point condition.
void fd_point_jacobian(const PointCondition& pc, int n, int ns, const double* x0,
                       const double* x1, const double* q, double* dgdx0, double* dgdx1,
                       double* dgdq) {
  const int rows = pc.rows;
  std::vector<double> gp(rows), gm(rows), pert;
  const auto wiggle = [&](const double* base, int len, int k, double* out, int stride_target) {
    pert.assign(base, base + len);
    const double h = 1e-6 * (1.0 + std::abs(base[k]));
    pert[k] = base[k] + h;
    const double* a0 = (stride_target == 0) ? pert.data() : x0;
    const double* a1 = (stride_target == 1) ? pert.data() : x1;
    const double* aq = (stride_target == 2) ? pert.data() : q;
    pc.g(a0, a1, aq, gp.data());
    pert[k] = base[k] - h;
    pc.g(a0, a1, aq, gm.data());
    for (int r = 0; r < rows; ++r) out[r * (stride_target == 2 ? ns : n) + k] =
        (gp[r] - gm[r]) / (2.0 * h);
  };
  for (int k = 0; k < n; ++k) wiggle(x0, n, k, dgdx0, 0);
  for (int k = 0; k < n; ++k) wiggle(x1, n, k, dgdx1, 1);
  for (int k = 0; k < ns; ++k) wiggle(q, ns, k, dgdq, 2);
}

}  // namespace

void assemble(const Problem& p, const Mesh& mesh, const Eigen::VectorXd& y,
              Eigen::VectorXd* residual, std::vector<Eigen::Triplet<double>>* jac) {
  const Layout lay = make_layout(p, mesh);
  if (y.size() != lay.dim()) throw AssemblyError("unknown vector has wrong dimension");
  const GaussTables& gt = gauss_tables(lay.m);
  const int n = lay.n, m = lay.m, N = lay.N, ns = lay.ns;

  residual->resize(lay.dim());
  if (jac) {
    jac->clear();
    jac->reserve(static_cast<size_t>(N) * n * (m + 1) * (n * (m + 2) + ns) / 2 +
                 static_cast<size_t>(n + ns) * 4 * n);
  }
  const double* q = y.data() + lay.scalar(0);

  std::vector<double> f(static_cast<size_t>(m) * n);
  std::vector<double> df(static_cast<size_t>(m) * n * n);
  std::vector<double> dfq(jac && ns > 0 ? static_cast<size_t>(m) * n * ns : 0);

  for (int i = 0; i < N; ++i) {
    const double h = mesh.nodes[i + 1] - mesh.nodes[i];
    const double* xi = y.data() + lay.node(i);
    const double* xn = y.data() + lay.node(i + 1);
    for (int j = 0; j < m; ++j) {
      const double* Xj = y.data() + lay.stage(i, j);
      p.f(Xj, q, f.data() + j * n);
      if (jac) {
        p.dfdx(Xj, q, df.data() + static_cast<size_t>(j) * n * n);
        if (ns > 0) p.dfdq(Xj, q, dfq.data() + static_cast<size_t>(j) * n * ns);
      }
    }
    const int row0 = lay.node(i);  // block rows align with the node/stage columns
    for (int j = 0; j < m; ++j) {
      const int row = row0 + j * n;
      const double* Xj = y.data() + lay.stage(i, j);
      for (int a = 0; a < n; ++a) {
        double acc = Xj[a] - xi[a];
        for (int k = 0; k < m; ++k) acc -= h * gt.A[j][k] * f[k * n + a];
        (*residual)[row + a] = acc;
      }
      if (jac) {
        for (int a = 0; a < n; ++a) jac->emplace_back(row + a, lay.node(i) + a, -1.0);
        for (int k = 0; k < m; ++k) {
          const double* Dk = df.data() + static_cast<size_t>(k) * n * n;
          const double hA = h * gt.A[j][k];
          for (int a = 0; a < n; ++a)
            for (int bcol = 0; bcol < n; ++bcol) {
              double v = -hA * Dk[a * n + bcol];
              if (k == j && a == bcol) v += 1.0;
              if (v != 0.0) jac->emplace_back(row + a, lay.stage(i, k) + bcol, v);
            }
        }
        if (ns > 0) {
          for (int a = 0; a < n; ++a)
            for (int s = 0; s < ns; ++s) {
              double v = 0.0;
              for (int k = 0; k < m; ++k)
                v -= h * gt.A[j][k] * dfq[static_cast<size_t>(k) * n * ns + a * ns + s];
              if (v != 0.0) jac->emplace_back(row + a, lay.scalar(s), v);
            }
        }
      }
    }
    const int crow = row0 + m * n;
    for (int a = 0; a < n; ++a) {
      double acc = xn[a] - xi[a];
      for (int j = 0; j < m; ++j) acc -= h * gt.b[j] * f[j * n + a];
      (*residual)[crow + a] = acc;
    }
    if (jac) {
      for (int a = 0; a < n; ++a) {
        jac->emplace_back(crow + a, lay.node(i + 1) + a, 1.0);
        jac->emplace_back(crow + a, lay.node(i) + a, -1.0);
      }
      for (int j = 0; j < m; ++j) {
        const double* Dj = df.data() + static_cast<size_t>(j) * n * n;
        const double hb = h * gt.b[j];
        for (int a = 0; a < n; ++a)
          for (int bcol = 0; bcol < n; ++bcol) {
            const double v = -hb * Dj[a * n + bcol];
            if (v != 0.0) jac->emplace_back(crow + a, lay.stage(i, j) + bcol, v);
          }
      }
      if (ns > 0) {
        for (int a = 0; a < n; ++a)
          for (int s = 0; s < ns; ++s) {
            double v = 0.0;
            for (int j = 0; j < m; ++j)
              v -= h * gt.b[j] * dfq[static_cast<size_t>(j) * n * ns + a * ns + s];
            if (v != 0.0) jac->emplace_back(crow + a, lay.scalar(s), v);
          }
      }
    }
  }

  int row = N * n * (m + 1);
  const double* x0 = y.data() + lay.node(0);
  const double* x1 = y.data() + lay.node(N);
  std::vector<double> g, dgdx0, dgdx1, dgdq;
  for (const auto& pc : p.point_conditions) {
    g.resize(pc.rows);
    pc.g(x0, x1, q, g.data());
    for (int r = 0; r < pc.rows; ++r) (*residual)[row + r] = g[r];
    if (jac) {
      dgdx0.assign(static_cast<size_t>(pc.rows) * n, 0.0);
      dgdx1.assign(static_cast<size_t>(pc.rows) * n, 0.0);
      dgdq.assign(std::max<size_t>(1, static_cast<size_t>(pc.rows) * ns), 0.0);
      if (pc.dg)
        pc.dg(x0, x1, q, dgdx0.data(), dgdx1.data(), dgdq.data());
      else
        fd_point_jacobian(pc, n, ns, x0, x1, q, dgdx0.data(), dgdx1.data(), dgdq.data());
      for (int r = 0; r < pc.rows; ++r) {
        for (int a = 0; a < n; ++a) {
          if (dgdx0[r * n + a] != 0.0)
            jac->emplace_back(row + r, lay.node(0) + a, dgdx0[r * n + a]);
          if (dgdx1[r * n + a] != 0.0)
            jac->emplace_back(row + r, lay.node(N) + a, dgdx1[r * n + a]);
        }
        for (int s = 0; s < ns; ++s)
          if (dgdq[r * ns + s] != 0.0)
            jac->emplace_back(row + r, lay.scalar(s), dgdq[r * ns + s]);
      }
    }
    row += pc.rows;
  }

  std::vector<double> dphidx(n), dphidq_acc(std::max(1, ns)), dphidq(std::max(1, ns));
  for (const auto& ic : p.integral_conditions) {
    double acc = 0.0;
    std::fill(dphidq_acc.begin(), dphidq_acc.end(), 0.0);
    for (int i = 0; i < N; ++i) {
      const double h = mesh.nodes[i + 1] - mesh.nodes[i];
      for (int j = 0; j < m; ++j) {
        const double t = mesh.nodes[i] + h * gt.c[j];
        const double* Xj = y.data() + lay.stage(i, j);
        const double w = h * gt.b[j];
        acc += w * ic.phi(t, Xj, q);
        if (jac) {
          ic.dphidx(t, Xj, q, dphidx.data());
          for (int a = 0; a < n; ++a)
            if (dphidx[a] != 0.0) jac->emplace_back(row, lay.stage(i, j) + a, w * dphidx[a]);
          if (ns > 0 && ic.dphidq) {
            ic.dphidq(t, Xj, q, dphidq.data());
            for (int s = 0; s < ns; ++s) dphidq_acc[s] += w * dphidq[s];
          }
        }
      }
    }
    (*residual)[row] = acc;
    if (jac)
      for (int s = 0; s < ns; ++s)
        if (dphidq_acc[s] != 0.0) jac->emplace_back(row, lay.scalar(s), dphidq_acc[s]);
    ++row;
  }

  for (const auto& dc : p.dense_conditions) {
    if (dc.row.size() != lay.dim()) throw AssemblyError("dense condition row has wrong length");
    (*residual)[row] = dc.row.dot(y) - dc.rhs;
    if (jac)
      for (Eigen::Index cidx = 0; cidx < dc.row.size(); ++cidx)
        if (dc.row[cidx] != 0.0) jac->emplace_back(row, static_cast<int>(cidx), dc.row[cidx]);
    ++row;
  }
}

NewtonReport newton_solve(const Problem& p, const Mesh& mesh, Eigen::VectorXd& y,
                          const NewtonOptions& opts) {
  const Layout lay = make_layout(p, mesh);
  NewtonReport rep;
  Eigen::VectorXd res, res_try, y_try;
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::SparseMatrix<double> J(lay.dim(), lay.dim());

  double rnorm = 0.0;
  for (int iter = 0;; ++iter) {
    assemble(p, mesh, y, &res, &trips);
    rnorm = inf_norm(res);
    if (iter == 0) rep.residual_initial = rnorm;
    if (rnorm <= opts.tol) {
      rep.converged = true;
      break;
    }
    if (iter >= opts.max_iter) {
      rep.message = "no convergence within max_iter";
      break;
    }

    J.setFromTriplets(trips.begin(), trips.end());
    J.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success) {
      double a1 = 0.0;
      for (int k = 0; k < J.outerSize(); ++k) {
        double col = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(J, k); it; ++it)
          col += std::abs(it.value());
        a1 = std::max(a1, col);
      }
      std::ostringstream os;
      os << "singular collocation linearization (dim " << lay.dim() << ", |A|_1 ~ " << a1
         << "): " << lu.lastErrorMessage();
      rep.message = os.str();
      rep.residual = rnorm;
      if (opts.throw_on_fail) throw SolverError(rep.message);
      return rep;
    }
    const Eigen::VectorXd delta = lu.solve(res);
    if (!delta.allFinite()) {
      rep.message = "linear solve produced non-finite correction";
      break;
    }

    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= opts.min_damping) {
      y_try = y - alpha * delta;
      assemble(p, mesh, y_try, &res_try, nullptr);
      if (inf_norm(res_try) < rnorm) {
        y = y_try;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    rep.iterations = iter + 1;
    if (!accepted) {
      rep.message = "damped step failed to reduce the residual";
      rnorm = inf_norm(res);
      break;
    }
  }
  rep.residual = rnorm;
  if (!rep.converged && opts.throw_on_fail)
    throw SolverError("collocation Newton failed: " + rep.message +
                      " (residual " + std::to_string(rnorm) + ")");
  return rep;
}

void eval_states(const Mesh& mesh, int n, const Eigen::VectorXd& states, double t, double* out) {
  const int m = mesh.stages;
  const GaussTables& gt = gauss_tables(m);
  const Layout lay{n, m, mesh.intervals(), 0};
  const int i = find_interval(mesh.nodes, t);
  const double h = mesh.nodes[i + 1] - mesh.nodes[i];
  const double theta = (t - mesh.nodes[i]) / h;
  double basis[8];
  gt.interp_basis(theta, basis);
  for (int a = 0; a < n; ++a) {
    double v = basis[0] * states[lay.node(i) + a];
    for (int j = 0; j < m; ++j) v += basis[j + 1] * states[lay.stage(i, j) + a];
    out[a] = v;
  }
}

void eval_solution(const Problem& p, const Mesh& mesh, const Eigen::VectorXd& y, double t,
                   double* out) {
  eval_states(mesh, p.n, y, t, out);
}

double state_norm_inf(const Problem& p, const Mesh& mesh, const Eigen::VectorXd& y) {
  const Layout lay = make_layout(p, mesh);
  double v = 0.0;
  for (int i = 0; i < lay.scalar(0); ++i) v = std::max(v, std::abs(y[i]));
  return v;
}

AdaptResult adapt_mesh(const Problem& p, const Mesh& mesh, const Eigen::VectorXd& y,
                       const AdaptOptions& opts) {
  const Layout lay = make_layout(p, mesh);
  const GaussTables& gt = gauss_tables(lay.m);
  const int n = lay.n, m = lay.m, N = lay.N;

  double mfact = 1.0;
  for (int k = 2; k <= m; ++k) mfact *= k;

  // Leading (m-th) derivative of the collocation polynomial per interval,
  // from the divided difference over {0, c_1..c_m}.
  std::vector<double> scale(n, 1.0);
  for (int i = 0; i <= N; ++i)
    for (int a = 0; a < n; ++a)
      scale[a] = std::max(scale[a], std::abs(y[lay.node(i) + a]));

  Eigen::MatrixXd D(N, n);
  for (int i = 0; i < N; ++i) {
    const double h = mesh.nodes[i + 1] - mesh.nodes[i];
    const double hm = std::pow(h, m);
    for (int a = 0; a < n; ++a) {
      double dd = gt.interp_wbary[0] * y[lay.node(i) + a];
      for (int j = 0; j < m; ++j) dd += gt.interp_wbary[j + 1] * y[lay.stage(i, j) + a];
      D(i, a) = mfact * dd / hm;
    }
  }

  // Estimate the (m+1)-th derivative from slopes of D between interval
  // midpoints; the monitor is its (m+1)-th root (equidistributes the local
  // interpolation error).
  std::vector<double> slope(N, 0.0);
  for (int i = 0; i + 1 < N; ++i) {
    const double mid_gap =
        0.5 * (mesh.nodes[i + 2] + mesh.nodes[i + 1]) - 0.5 * (mesh.nodes[i + 1] + mesh.nodes[i]);
    double s = 0.0;
    for (int a = 0; a < n; ++a)
      s = std::max(s, std::abs(D(i + 1, a) - D(i, a)) / scale[a]);
    s /= mid_gap;
    slope[i] = std::max(slope[i], s);
    slope[i + 1] = std::max(slope[i + 1], s);
  }

  AdaptResult out;
  out.mesh = mesh;
  out.y = y;

  // Rounding floor: dd carries an absolute error of eps * sum|w| * scale, so
  // D inherits mfact * eps * sum|w| / h^m after normalisation.  Slopes below
  // that are noise from an exactly resolved polynomial, not structure.
  double wsum = 0.0;
  for (int j = 0; j <= m; ++j) wsum += std::abs(gt.interp_wbary[j]);
  double noise = 0.0;
  for (int i = 0; i + 1 < N; ++i) {
    const double mid_gap =
        0.5 * (mesh.nodes[i + 2] + mesh.nodes[i + 1]) - 0.5 * (mesh.nodes[i + 1] + mesh.nodes[i]);
    const double da = std::pow(mesh.nodes[i + 1] - mesh.nodes[i], m);
    const double db = std::pow(mesh.nodes[i + 2] - mesh.nodes[i + 1], m);
    const double fl =
        mfact * wsum * std::numeric_limits<double>::epsilon() * (1.0 / da + 1.0 / db) / mid_gap;
    noise = std::max(noise, fl);
  }
  const double smax = *std::max_element(slope.begin(), slope.end());
  if (smax <= std::max(1e-10, 64.0 * noise)) return out;

  std::vector<double> monitor(N);
  for (int i = 0; i < N; ++i) monitor[i] = std::pow(slope[i], 1.0 / (m + 1));

  std::vector<double> sorted = monitor;
  std::nth_element(sorted.begin(), sorted.begin() + N / 2, sorted.end());
  const double median = sorted[N / 2];
  const double peak = *std::max_element(monitor.begin(), monitor.end());
  int n_new = N;
  if (peak > opts.ratio_threshold * std::max(median, 1e-300) && 2 * N <= opts.n_max)
    n_new = 2 * N;

  const double floor_v = 0.01 * peak;
  std::vector<double> cum(N + 1, 0.0);
  for (int i = 0; i < N; ++i)
    cum[i + 1] = cum[i] + std::max(monitor[i], floor_v) * (mesh.nodes[i + 1] - mesh.nodes[i]);

  Mesh fresh;
  fresh.stages = m;
  fresh.nodes.resize(n_new + 1);
  fresh.nodes[0] = 0.0;
  fresh.nodes[n_new] = 1.0;
  for (int j = 1; j < n_new; ++j) {
    const double target = cum[N] * j / n_new;
    const auto it = std::upper_bound(cum.begin(), cum.end(), target);
    const int i = std::clamp(static_cast<int>(it - cum.begin()) - 1, 0, N - 1);
    const double frac = (target - cum[i]) / (cum[i + 1] - cum[i]);
    fresh.nodes[j] = mesh.nodes[i] + frac * (mesh.nodes[i + 1] - mesh.nodes[i]);
  }

  bool moved = n_new != N;
  if (!moved)
    for (int j = 0; j <= N; ++j)
      if (std::abs(fresh.nodes[j] - mesh.nodes[j]) > 1e-12) {
        moved = true;
        break;
      }
  if (!moved) return out;

  const Layout lay2{n, m, n_new, lay.ns};
  Eigen::VectorXd y2(lay2.dim());
  std::vector<double> xv(n);
  for (int i = 0; i <= n_new; ++i) {
    eval_solution(p, mesh, y, fresh.nodes[i], xv.data());
    for (int a = 0; a < n; ++a) y2[lay2.node(i) + a] = xv[a];
    if (i == n_new) break;
    const double h = fresh.nodes[i + 1] - fresh.nodes[i];
    for (int j = 0; j < m; ++j) {
      eval_solution(p, mesh, y, fresh.nodes[i] + h * gt.c[j], xv.data());
      for (int a = 0; a < n; ++a) y2[lay2.stage(i, j) + a] = xv[a];
    }
  }
  for (int s = 0; s < lay.ns; ++s) y2[lay2.scalar(s)] = y[lay.scalar(s)];

  out.mesh = std::move(fresh);
  out.y = std::move(y2);
  out.changed = true;
  return out;
}

}  // namespace lamorbit::bvp
