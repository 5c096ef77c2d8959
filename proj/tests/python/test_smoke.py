import math

import _lamorbit as lam


def test_analytic_values():
    assert lam.hamiltonian([0.0, 0.0, 1.0, 0.0]) == -0.125
    assert abs(lam.jump_action() - 4.0 / 3.0) < 1e-12
    assert abs(lam.mueller_period(1e-3) - 0.4) < 1e-12
    assert abs(lam.critical_manifold_v(1.0)) < 1e-15


def test_gradient_is_orthogonal_to_flow():
    x = [0.3, -0.1, 0.7, 0.05]
    f = lam.vector_field(x, 1e-2)
    g = lam.hamiltonian_gradient(x)
    assert abs(sum(a * b for a, b in zip(f, g))) < 1e-12


def test_singular_period():
    assert abs(lam.singular_period(0.0) - 2.2591604973) < 1e-6


def test_seed_orbit_round_trip():
    orbit = lam.seed_orbit(1e-3)
    assert orbit.period > 0
    assert abs(orbit.lam) <= 1e-8
    assert orbit.residual <= 1e-9
    assert abs(lam.hamiltonian(orbit.eval(0.0)) - orbit.mu) < 1e-8

    again = lam.orbit_from_json(orbit.to_json())
    assert math.isclose(again.period, orbit.period, rel_tol=1e-6)
