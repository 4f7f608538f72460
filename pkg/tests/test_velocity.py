"""Screened-velocity solve, gradient representation, lower-bound margins."""

import numpy as np
import pytest

from driftcluster import Grid, Params, norm_sup, solve_helmholtz, solve_velocity
from driftcluster.velocity import (double_integral_term, gradient_identity_defect,
                                   gradient_lower_bound_margin, gradient_values,
                                   helmholtz_system, velocity_source)


def _exact_screened(x, eps):
    # -eps phi'' + phi = 1, phi(+-1) = 0
    s = np.sqrt(eps)
    return 1.0 - np.cosh(x / s) / np.cosh(1.0 / s)


@pytest.mark.parametrize("eps", [1.0, 0.5, 0.1])
def test_screened_solve_against_closed_form(eps):
    g = Grid(200)
    phi = solve_helmholtz(np.ones(200), eps, g)
    err = norm_sup(phi - _exact_screened(g.centers, eps), g)
    assert err <= 5.0 * g.h ** 2


def test_screened_solve_center_value():
    # eps = 1, unit forcing: phi(0) = 1 - 1/cosh(1)
    g = Grid(200)
    phi = solve_helmholtz(np.ones(200), 1.0, g)
    mid = 0.5 * (phi[99] + phi[100])
    assert mid == pytest.approx(0.35194572633611454, abs=5e-5)


def test_screened_solve_second_order():
    errs = []
    for n in (100, 200):
        g = Grid(n)
        phi = solve_helmholtz(np.ones(n), 1.0, g)
        errs.append(norm_sup(phi - _exact_screened(g.centers, 1.0), g))
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_system_reduces_to_identity_without_screening():
    # as eps -> 0 the operator tends to the identity; with tiny eps the
    # solution tracks the forcing away from the walls
    g = Grid(400)
    rhs = np.sin(np.pi * g.centers)
    phi = solve_helmholtz(rhs, 1e-8, g)
    inner = slice(50, 350)
    np.testing.assert_allclose(phi[inner], rhs[inner], atol=1e-4)


def test_helmholtz_system_row_structure():
    g = Grid(8)
    eps = 0.5
    k = eps / g.h ** 2
    sys = helmholtz_system(np.ones(8), eps, g)
    np.testing.assert_allclose(sys.diag[1:-1], 1.0 + 2.0 * k)
    np.testing.assert_allclose(sys.diag[[0, -1]], 1.0 + 3.0 * k)
    np.testing.assert_allclose(sys.sub, -k)
    np.testing.assert_allclose(sys.sup, -k)


def test_uniform_density_gives_zero_velocity(monostable_params):
    g = Grid(64)
    vel = solve_velocity(np.full(64, 0.7), monostable_params, g)
    np.testing.assert_allclose(vel.values, 0.0, atol=1e-14)
    np.testing.assert_allclose(vel.face_values, 0.0, atol=1e-14)


def test_source_forms_agree_on_smooth_density():
    g = Grid(400)
    u = 0.5 + 0.3 * np.cos(np.pi * g.centers)
    for law, kw in [("monostable", {}), ("bistable", dict(a=0.25))]:
        p_div = Params(delta=0.0, epsilon=0.5, r=1.0, law=law, **kw)
        p_chain = Params(delta=0.0, epsilon=0.5, r=1.0, law=law,
                         rhs_form="chain_rule", **kw)
        diff = velocity_source(u, p_div, g) - velocity_source(u, p_chain, g)
        assert norm_sup(diff, g) < 1e-3


def test_gradient_values_second_order():
    errs = []
    for n in (100, 200):
        g = Grid(n)
        phi = np.sin(np.pi * g.centers)  # vanishes at both walls
        dphi = gradient_values(phi, g)
        errs.append(norm_sup(dphi - np.pi * np.cos(np.pi * g.centers), g))
    assert errs[0] / errs[1] > 3.5


def test_double_integral_closed_form():
    # I(x) = int_{-1}^{1} int_y^{x} cos(pi z / 2) dz dy = (4 / pi) sin(pi x / 2)
    errs = []
    for n in (100, 200):
        g = Grid(n)
        got = double_integral_term(np.cos(np.pi * g.centers / 2), g)
        exact = (4.0 / np.pi) * np.sin(np.pi * g.centers / 2)
        errs.append(np.max(np.abs(got - exact)))
    assert errs[1] < 1e-4
    assert errs[0] / errs[1] > 3.5  # midpoint cumulatives are second order


def test_gradient_identity_defect_first_order():
    sups = []
    for n in (100, 200, 400):
        g = Grid(n)
        u = 0.5 + 0.3 * np.cos(np.pi * g.centers)
        p = Params(delta=0.0, epsilon=0.5, r=1.0, law="bistable", a=0.25)
        vel = solve_velocity(u, p, g)
        defect = gradient_identity_defect(u, vel.values, p, g)
        sups.append(float(np.max(np.abs(defect))))
    assert sups[0] / sups[1] >= 1.4
    assert sups[1] / sups[2] >= 1.4


def test_gradient_identity_defect_monostable():
    sups = []
    for n in (100, 200):
        g = Grid(n)
        u = 0.5 + 0.3 * np.cos(np.pi * g.centers)
        p = Params(delta=0.0, epsilon=0.5, r=1.0, law="monostable")
        vel = solve_velocity(u, p, g)
        defect = gradient_identity_defect(u, vel.values, p, g)
        sups.append(float(np.max(np.abs(defect))))
    assert sups[0] / sups[1] >= 1.4


def test_margin_closed_form_uniform_density():
    # uniform u = 0.5, monostable, eps = 1: phi = 0, grad phi = 0, so the
    # proof-form margin reduces to (1 / (2 eps)) * ||u||_1 = 0.5
    g = Grid(128)
    p = Params(delta=0.0, epsilon=1.0, r=1.0, law="monostable")
    u = np.full(128, 0.5)
    vel = solve_velocity(u, p, g)
    m = gradient_lower_bound_margin(vel.values, u, p, g, form="proof")
    assert m == pytest.approx(0.5, abs=1e-12)


def test_margin_nonnegative_on_solved_states(bump_ic, rng):
    from driftcluster import build_initial
    g = Grid(128)
    u = build_initial(bump_ic, g)
    for law, kw in [("monostable", {}), ("bistable", dict(a=0.25))]:
        p = Params(delta=0.0, epsilon=0.5, r=1.0, law=law, **kw)
        vel = solve_velocity(u, p, g)
        proof = gradient_lower_bound_margin(vel.values, u, p, g, form="proof")
        stmt = gradient_lower_bound_margin(vel.values, u, p, g,
                                           form="statement")
        assert proof >= -1e-6
        assert np.isfinite(stmt)


def test_margin_rejects_unknown_form():
    g = Grid(8)
    p = Params(delta=0.0, epsilon=1.0, r=0.0, law="monostable")
    with pytest.raises(Exception):
        gradient_lower_bound_margin(np.zeros(8), np.zeros(8), p, g,
                                    form="loose")
