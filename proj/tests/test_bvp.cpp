#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "lamorbit/bvp.hpp"

using namespace lamorbit;
using Eigen::VectorXd;

namespace {

// y' = y with y(0) = 1 on [0, 1].
bvp::Problem exponential_problem() {
  bvp::Problem p;
  p.n = 1;
  p.f = [](const double* x, const double*, double* out) { out[0] = x[0]; };
  p.dfdx = [](const double*, const double*, double* out) { out[0] = 1.0; };
  bvp::PointCondition ic;
  ic.g = [](const double* x0, const double*, const double*, double* out) { out[0] = x0[0] - 1.0; };
  p.point_conditions.push_back(ic);
  return p;
}

VectorXd flat_guess(const bvp::Problem& p, const bvp::Mesh& mesh, double value) {
  const bvp::Layout lay = bvp::make_layout(p, mesh);
  VectorXd y = VectorXd::Constant(lay.dim(), value);
  return y;
}

double solve_exponential(int intervals, int stages) {
  bvp::Problem p = exponential_problem();
  bvp::Mesh mesh = bvp::Mesh::uniform(intervals, stages);
  VectorXd y = flat_guess(p, mesh, 1.0);
  const bvp::NewtonReport rep = bvp::newton_solve(p, mesh, y);
  REQUIRE(rep.converged);
  const bvp::Layout lay = bvp::make_layout(p, mesh);
  return y[lay.node(intervals)];
}

}  // namespace

TEST_CASE("gauss tables integrate polynomials to degree 2m-1") {
  for (int m = 2; m <= 7; ++m) {
    const bvp::GaussTables& gt = bvp::gauss_tables(m);
    REQUIRE(static_cast<int>(gt.c.size()) == m);
    for (int k = 0; k < 2 * m; ++k) {
      double acc = 0.0;
      for (int j = 0; j < m; ++j) acc += gt.b[j] * std::pow(gt.c[j], k);
      CHECK(acc == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
    for (int j = 0; j < m; ++j) {
      CHECK(gt.c[j] > 0.0);
      CHECK(gt.c[j] < 1.0);
      if (j > 0) CHECK(gt.c[j] > gt.c[j - 1]);
      double row = 0.0;
      for (int k = 0; k < m; ++k) row += gt.A[j][k];
      CHECK(row == doctest::Approx(gt.c[j]).epsilon(1e-13));
    }
    // The interpolation basis reproduces polynomials of degree m.
    std::vector<double> basis(m + 1);
    for (double theta : {0.0, 0.31, gt.c[1], 0.97, 1.0}) {
      gt.interp_basis(theta, basis.data());
      double sum = 0.0, poly = 0.0;
      for (int k = 0; k <= m; ++k) {
        sum += basis[k];
        poly += basis[k] * std::pow(gt.interp_abscissae[k], m);
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(poly == doctest::Approx(std::pow(theta, m)).epsilon(1e-11));
    }
  }
}

TEST_CASE("exponential solve hits e at the endpoint") {
  CHECK(std::abs(solve_exponential(10, 4) - std::exp(1.0)) <= 1e-9);
  CHECK(std::abs(solve_exponential(20, 4) - std::exp(1.0)) <= 1e-11);
}

TEST_CASE("node superconvergence has order 2m") {
  std::vector<double> errs;
  for (int n : {10, 20, 40}) {
    errs.push_back(std::abs(solve_exponential(n, 2) - std::exp(1.0)));
  }
  const double p1 = std::log2(errs[0] / errs[1]);
  const double p2 = std::log2(errs[1] / errs[2]);
  CHECK(p1 > 3.3);
  CHECK(p1 < 4.7);
  CHECK(p2 > 3.3);
  CHECK(p2 < 4.7);
}

TEST_CASE("harmonic oscillator boundary problem") {
  bvp::Problem p;
  p.n = 2;
  p.f = [](const double* x, const double*, double* out) {
    out[0] = x[1];
    out[1] = -x[0];
  };
  p.dfdx = [](const double*, const double*, double* out) {
    out[0] = 0.0;
    out[1] = 1.0;
    out[2] = -1.0;
    out[3] = 0.0;
  };
  bvp::PointCondition ic;
  ic.rows = 2;
  ic.g = [](const double* x0, const double*, const double*, double* out) {
    out[0] = x0[0];
    out[1] = x0[1] - 1.0;
  };
  p.point_conditions.push_back(ic);

  bvp::Mesh mesh = bvp::Mesh::uniform(20, 4);
  VectorXd y = flat_guess(p, mesh, 0.5);
  const bvp::NewtonReport rep = bvp::newton_solve(p, mesh, y);
  REQUIRE(rep.converged);
  const bvp::Layout lay = bvp::make_layout(p, mesh);
  CHECK(y[lay.node(20) + 0] == doctest::Approx(std::sin(1.0)).epsilon(1e-10));
  CHECK(y[lay.node(20) + 1] == doctest::Approx(std::cos(1.0)).epsilon(1e-10));

  // Collocation-polynomial evaluation between nodes.
  double mid[2];
  bvp::eval_solution(p, mesh, y, 0.525, mid);
  CHECK(mid[0] == doctest::Approx(std::sin(0.525)).epsilon(1e-10));
  double mid2[2];
  bvp::eval_states(mesh, 2, y.head(lay.scalar(0)), 0.525, mid2);
  CHECK(mid2[0] == doctest::Approx(mid[0]).epsilon(1e-14));
}

TEST_CASE("unknown period picks up pi") {
  bvp::Problem p;
  p.n = 2;
  p.ns = 1;
  p.f = [](const double* x, const double* q, double* out) {
    out[0] = q[0] * x[1];
    out[1] = -q[0] * x[0];
  };
  p.dfdx = [](const double*, const double* q, double* out) {
    out[0] = 0.0;
    out[1] = q[0];
    out[2] = -q[0];
    out[3] = 0.0;
  };
  p.dfdq = [](const double* x, const double*, double* out) {
    out[0] = x[1];
    out[1] = -x[0];
  };
  bvp::PointCondition anchor;
  anchor.rows = 2;
  anchor.g = [](const double* x0, const double*, const double*, double* out) {
    out[0] = x0[0];
    out[1] = x0[1] - 1.0;
  };
  bvp::PointCondition landing;
  landing.g = [](const double*, const double* x1, const double*, double* out) {
    out[0] = x1[0];
  };
  p.point_conditions.push_back(anchor);
  p.point_conditions.push_back(landing);

  bvp::Mesh mesh = bvp::Mesh::uniform(30, 4);
  const bvp::Layout lay = bvp::make_layout(p, mesh);
  VectorXd y(lay.dim());
  const bvp::GaussTables& gt = bvp::gauss_tables(4);
  for (int i = 0; i <= 30; ++i) {
    const double t = mesh.nodes[i];
    y[lay.node(i) + 0] = std::sin(3.0 * t);
    y[lay.node(i) + 1] = std::cos(3.0 * t);
  }
  for (int i = 0; i < 30; ++i) {
    const double h = mesh.nodes[i + 1] - mesh.nodes[i];
    for (int j = 0; j < 4; ++j) {
      const double t = mesh.nodes[i] + h * gt.c[j];
      y[lay.stage(i, j) + 0] = std::sin(3.0 * t);
      y[lay.stage(i, j) + 1] = std::cos(3.0 * t);
    }
  }
  y[lay.scalar(0)] = 3.0;
  const bvp::NewtonReport rep = bvp::newton_solve(p, mesh, y);
  REQUIRE(rep.converged);
  CHECK(y[lay.scalar(0)] == doctest::Approx(std::acos(-1.0)).epsilon(1e-10));
  CHECK(y[lay.node(30) + 1] == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("integral and dense conditions") {
  // x' = a (scalar slope), x(0) = 0, with the mean of x pinned to 1/2.
  bvp::Problem p;
  p.n = 1;
  p.ns = 1;
  p.f = [](const double*, const double* q, double* out) { out[0] = q[0]; };
  p.dfdx = [](const double*, const double*, double* out) { out[0] = 0.0; };
  p.dfdq = [](const double*, const double*, double* out) { out[0] = 1.0; };
  bvp::PointCondition ic;
  ic.g = [](const double* x0, const double*, const double*, double* out) { out[0] = x0[0]; };
  p.point_conditions.push_back(ic);
  bvp::IntegralCondition mean;
  mean.phi = [](double, const double* x, const double*) { return x[0] - 0.5; };
  mean.dphidx = [](double, const double*, const double*, double* out) { out[0] = 1.0; };
  p.integral_conditions.push_back(mean);

  bvp::Mesh mesh = bvp::Mesh::uniform(12, 3);
  VectorXd y = flat_guess(p, mesh, 0.2);
  const bvp::NewtonReport rep = bvp::newton_solve(p, mesh, y);
  REQUIRE(rep.converged);
  const bvp::Layout lay = bvp::make_layout(p, mesh);
  CHECK(y[lay.scalar(0)] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(y[lay.node(12)] == doctest::Approx(1.0).epsilon(1e-10));

  // Same problem with the slope pinned by an affine row instead.
  bvp::Problem pd = p;
  pd.integral_conditions.clear();
  bvp::DenseCondition pin;
  pin.row = VectorXd::Zero(lay.dim());
  pin.row[lay.scalar(0)] = 1.0;
  pin.rhs = 2.0;
  pd.dense_conditions.push_back(pin);
  VectorXd yd = flat_guess(pd, mesh, 0.2);
  const bvp::NewtonReport repd = bvp::newton_solve(pd, mesh, yd);
  REQUIRE(repd.converged);
  CHECK(yd[lay.scalar(0)] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(yd[lay.node(12)] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("finite-difference point jacobians match analytic ones") {
  bvp::Problem p = exponential_problem();       // analytic dg is absent already
  bvp::PointCondition& pc = p.point_conditions.front();
  REQUIRE(!pc.dg);
  bvp::Mesh mesh = bvp::Mesh::uniform(10, 4);
  VectorXd y = flat_guess(p, mesh, 1.0);
  REQUIRE(bvp::newton_solve(p, mesh, y).converged);

  bvp::Problem pa = exponential_problem();
  pa.point_conditions.front().dg = [](const double*, const double*, const double*,
                                      double* dgdx0, double* dgdx1, double*) {
    dgdx0[0] = 1.0;
    dgdx1[0] = 0.0;
  };
  VectorXd ya = flat_guess(pa, mesh, 1.0);
  REQUIRE(bvp::newton_solve(pa, mesh, ya).converged);
  CHECK((y - ya).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("mesh adaptation resolves a boundary layer and leaves smooth solutions alone") {
  const double delta = 0.01;
  bvp::Problem p;
  p.n = 1;
  p.f = [delta](const double* x, const double*, double* out) { out[0] = -x[0] / delta; };
  p.dfdx = [delta](const double*, const double*, double* out) { out[0] = -1.0 / delta; };
  bvp::PointCondition ic;
  ic.g = [](const double* x0, const double*, const double*, double* out) { out[0] = x0[0] - 1.0; };
  p.point_conditions.push_back(ic);

  bvp::Mesh mesh = bvp::Mesh::uniform(40, 4);
  VectorXd y = flat_guess(p, mesh, 0.1);
  const bvp::Layout lay = bvp::make_layout(p, mesh);
  y[lay.node(0)] = 1.0;
  REQUIRE(bvp::newton_solve(p, mesh, y).converged);

  const bvp::AdaptResult ad = bvp::adapt_mesh(p, mesh, y);
  CHECK(ad.changed);
  CHECK(ad.mesh.nodes[1] < 1.0 / 40.0);  // refined toward the layer
  bvp::Mesh m2 = ad.mesh;
  VectorXd y2 = ad.y;
  REQUIRE(bvp::newton_solve(p, m2, y2).converged);
  double val;
  bvp::eval_solution(p, m2, y2, 0.05, &val);
  CHECK(val == doctest::Approx(std::exp(-5.0)).epsilon(1e-7));

  // A solution with constant derivative monitor keeps its mesh.
  bvp::Problem lin;
  lin.n = 1;
  lin.f = [](const double*, const double*, double* out) { out[0] = 1.0; };
  lin.dfdx = [](const double*, const double*, double* out) { out[0] = 0.0; };
  bvp::PointCondition lic;
  lic.g = [](const double* x0, const double*, const double*, double* out) { out[0] = x0[0]; };
  lin.point_conditions.push_back(lic);
  bvp::Mesh lmesh = bvp::Mesh::uniform(12, 4);
  VectorXd ly = flat_guess(lin, lmesh, 0.0);
  REQUIRE(bvp::newton_solve(lin, lmesh, ly).converged);
  const bvp::AdaptResult lad = bvp::adapt_mesh(lin, lmesh, ly);
  CHECK(!lad.changed);
}

TEST_CASE("shape errors are rejected") {
  bvp::Problem p = exponential_problem();
  p.point_conditions.clear();  // zero condition rows for n + ns = 1
  bvp::Mesh mesh = bvp::Mesh::uniform(10, 4);
  CHECK_THROWS_AS(bvp::make_layout(p, mesh), bvp::AssemblyError);

  CHECK_THROWS(bvp::Mesh::uniform(10, 9).validate());
}
