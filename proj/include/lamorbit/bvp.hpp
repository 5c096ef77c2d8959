#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

// Two-point BVP solver: Gauss-Legendre collocation of degree m on an adaptive
// mesh over [0,1], damped Newton corrector, and a sparse direct linear solve
// of the bordered collocation system (band plus dense rows/columns from
// integral conditions and scalar unknowns).
//
// Unknown vector layout:
//   [ x_0 | X_{0,1..m} | x_1 | X_{1,1..m} | ... | x_N | q_0..q_{ns-1} ]
// where x_i are node states, X_{i,j} collocation-stage states, q scalars.
// Equations: per interval the m stage equations and one continuity equation
// (implicit Runge-Kutta form of the collocation polynomial), then the
// problem's boundary/integral/affine conditions (must total n + ns rows).

namespace lamorbit::bvp {

class AssemblyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Mesh {
  std::vector<double> nodes;  // 0 = tau_0 < ... < tau_N = 1
  int stages = 4;             // collocation degree m, 2..7

  int intervals() const { return static_cast<int>(nodes.size()) - 1; }
  void validate() const;
  static Mesh uniform(int intervals, int stages = 4);
};

/// Collocation tables for m Gauss-Legendre points on (0,1).
struct GaussTables {
  int m = 0;
  std::vector<double> c;                  // abscissae
  std::vector<double> b;                  // quadrature weights
  std::vector<std::vector<double>> A;     // A[j][k] = int_0^{c_j} ell_k
  std::vector<double> interp_abscissae;   // {0, c_1, ..., c_m}
  std::vector<double> interp_wbary;       // barycentric weights for the above

  /// Lagrange basis over interp_abscissae evaluated at theta (m+1 values).
  void interp_basis(double theta, double* out) const;
};

const GaussTables& gauss_tables(int m);

struct Layout {
  int n = 0, m = 0, N = 0, ns = 0;
  int node(int i) const { return i * n * (m + 1); }
  int stage(int i, int j) const { return i * n * (m + 1) + n + j * n; }
  int scalar(int k) const { return n * (N * (m + 1) + 1) + k; }
  int dim() const { return n * (N * (m + 1) + 1) + ns; }
};

using RhsFn = std::function<void(const double* x, const double* q, double* out)>;
using RhsJacX = std::function<void(const double* x, const double* q, double* out)>;  // n*n row-major
using RhsJacQ = std::function<void(const double* x, const double* q, double* out)>;  // n*ns row-major

/// Condition on the endpoint states and scalars, g(x(0), x(1), q) = 0.
/// If dg is absent, a finite-difference Jacobian is used.
struct PointCondition {
  int rows = 1;
  std::function<void(const double* x0, const double* x1, const double* q, double* out)> g;
  std::function<void(const double* x0, const double* x1, const double* q, double* dgdx0,
                     double* dgdx1, double* dgdq)>
      dg;
};

/// Single-row integral condition: sum over the collocation quadrature of
/// phi(t, x(t), q) = 0.
struct IntegralCondition {
  std::function<double(double t, const double* x, const double* q)> phi;
  std::function<void(double t, const double* x, const double* q, double* out)> dphidx;  // n
  std::function<void(double t, const double* x, const double* q, double* out)> dphidq;  // ns
};

/// Affine condition over the full unknown vector: row . y - rhs = 0.
struct DenseCondition {
  Eigen::VectorXd row;
  double rhs = 0.0;
};

struct Problem {
  int n = 0;
  int ns = 0;
  RhsFn f;
  RhsJacX dfdx;
  RhsJacQ dfdq;  // may be empty when ns == 0
  std::vector<PointCondition> point_conditions;
  std::vector<IntegralCondition> integral_conditions;
  std::vector<DenseCondition> dense_conditions;

  int condition_rows() const;
};

Layout make_layout(const Problem& p, const Mesh& mesh);

/// Residual (and optionally Jacobian triplets) of the full collocation system.
void assemble(const Problem& p, const Mesh& mesh, const Eigen::VectorXd& y,
              Eigen::VectorXd* residual, std::vector<Eigen::Triplet<double>>* jac);

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 30;
  double min_damping = 1.0 / 1024.0;  // 2^-10
  bool throw_on_fail = true;
};

struct NewtonReport {
  bool converged = false;
  int iterations = 0;
  double residual_initial = 0.0;
  double residual = 0.0;
  std::string message;
};

/// Damped Newton (step halving on residual increase). On success y holds the
/// solution; on failure the best iterate. Throws SolverError per options.
NewtonReport newton_solve(const Problem& p, const Mesh& mesh, Eigen::VectorXd& y,
                          const NewtonOptions& opts = {});

/// Evaluate the collocation polynomial of the discrete solution at t in [0,1].
void eval_solution(const Problem& p, const Mesh& mesh, const Eigen::VectorXd& y, double t,
                   double* out);

/// Same, but needs only the state dimension (states may carry trailing
/// scalars; they are ignored).
void eval_states(const Mesh& mesh, int n, const Eigen::VectorXd& states, double t, double* out);

/// Max-norm of the state part of y (scalars excluded).
double state_norm_inf(const Problem& p, const Mesh& mesh, const Eigen::VectorXd& y);

struct AdaptOptions {
  int n_max = 3200;
  double ratio_threshold = 10.0;  // max/median indicator ratio that doubles N
};

struct AdaptResult {
  Mesh mesh;
  Eigen::VectorXd y;   // solution transferred to the new mesh
  bool changed = false;
};

/// Equidistribute the (m+1)-th-derivative error indicator of the current
/// solution; transfers the solution onto the new mesh by interpolation.
AdaptResult adapt_mesh(const Problem& p, const Mesh& mesh, const Eigen::VectorXd& y,
                       const AdaptOptions& opts = {});

}  // namespace lamorbit::bvp
