#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <vector>

#include "lamorbit/continuation.hpp"
#include "lamorbit/energy.hpp"
#include "lamorbit/io.hpp"
#include "lamorbit/model.hpp"
#include "lamorbit/periodic.hpp"
#include "lamorbit/seed.hpp"
#include "lamorbit/singular.hpp"
#include "lamorbit/types.hpp"

namespace py = pybind11;
using namespace lamorbit;

namespace {

State4 to_state(const std::array<double, 4>& x) { return State4::from_array(x.data()); }

std::vector<std::array<double, 4>> profile_states(const OrbitProfile& p, int samples) {
  std::vector<std::array<double, 4>> rows;
  rows.reserve(samples);
  for (int i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / (samples - 1);
    rows.push_back(p.eval(t).to_array());
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(_lamorbit, m) {
  m.doc() = "periodic orbits of the fast-slow Euler-Lagrange system";

  py::class_<OrbitProfile>(m, "Orbit")
      .def_property_readonly("period", [](const OrbitProfile& p) { return p.period; })
      .def_property_readonly("mu", [](const OrbitProfile& p) { return p.params.mu; })
      .def_property_readonly("eps", [](const OrbitProfile& p) { return p.params.epsilon; })
      .def_property_readonly("lam", [](const OrbitProfile& p) { return p.lambda; })
      .def_property_readonly("residual", [](const OrbitProfile& p) { return p.residual_norm; })
      .def("eval", [](const OrbitProfile& p, double t) { return p.eval(t).to_array(); },
           py::arg("t"), "state at normalized time t in [0, 1]")
      .def("sample", &profile_states, py::arg("samples") = 256,
           "uniformly sampled states over one period")
      .def("energy", &energy::functional_density,
           "mean of z^2 + (w^2-1)^2/4 + u^2 over one period")
      .def("to_json", [](const OrbitProfile& p) { return io::orbit_to_json(p, "python"); });

  m.def("hamiltonian",
        [](const std::array<double, 4>& x) { return model::hamiltonian(to_state(x)); },
        py::arg("state"));
  m.def("hamiltonian_gradient",
        [](const std::array<double, 4>& x) {
          return model::hamiltonian_gradient(to_state(x)).to_array();
        },
        py::arg("state"));
  m.def("vector_field",
        [](const std::array<double, 4>& x, double eps) {
          return model::vector_field_slow(to_state(x), eps).to_array();
        },
        py::arg("state"), py::arg("eps"), "slow-scale vector field");
  m.def("critical_manifold_v", &model::critical_manifold_v, py::arg("w"));
  m.def("singular_period", &model::singular_period, py::arg("mu"),
        "period T0(mu) of the singular orbit");
  m.def("jump_action", &energy::jump_action);
  m.def("mueller_period", &energy::mueller_period, py::arg("eps"),
        "asymptotic energy-minimizing period 2(6 A0 eps)^(1/3)");
  m.def("seed_orbit", &seed::build_seed_orbit, py::arg("eps"),
        "converged periodic orbit near the lower fold, eps in [1e-4, 1e-2]");
  m.def("continue_in_mu",
        [](const OrbitProfile& start, double to, int direction, int max_steps) {
          ContinuationOptions opts;
          opts.active = ActiveParam::Mu;
          opts.target = to;
          opts.direction = direction;
          opts.max_steps = max_steps;
          Branch branch = continue_branch(start, opts);
          std::vector<std::array<double, 3>> rows;
          rows.reserve(branch.points.size());
          for (const BranchPoint& bp : branch.points) rows.push_back({bp.mu, bp.eps, bp.P});
          return py::make_tuple(rows, branch.termination);
        },
        py::arg("start"), py::arg("to"), py::arg("direction") = -1,
        py::arg("max_steps") = 5000, "(mu, eps, P) rows and the termination reason");
  m.def("orbit_from_json",
        [](const std::string& text) { return solve_periodic(io::orbit_from_json(text)); },
        py::arg("text"), "parse and re-converge an orbit JSON document");
}
