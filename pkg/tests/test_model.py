"""Parameter validation, reproduction laws, initial profiles."""

import numpy as np
import pytest

from driftcluster import Grid, InitialCondition, Params, build_initial
from driftcluster.errors import ValidationError
from driftcluster.model import (reaction, reaction_lipschitz,
                                reproduction_rate, reproduction_rate_deriv)


@pytest.mark.parametrize("kw", [
    dict(delta=-0.1), dict(delta=1.0), dict(epsilon=0.0),
    dict(epsilon=-1.0), dict(r=-0.5), dict(law="logistic"),
    dict(rhs_form="weak"),
])
def test_params_rejects_bad_values(kw):
    base = dict(delta=0.1, epsilon=0.5, r=1.0, law="monostable")
    base.update(kw)
    with pytest.raises(ValidationError):
        Params(**base)


@pytest.mark.parametrize("a", [0.0, 1.0, -0.2, 1.5])
def test_bistable_threshold_range(a):
    with pytest.raises(ValidationError):
        Params(delta=0.1, epsilon=0.5, r=1.0, law="bistable", a=a)


def test_monostable_ignores_threshold():
    p = Params(delta=0.0, epsilon=1.0, r=0.0, law="monostable", a=7.0)
    assert not p.bistable


def test_reproduction_rate_roots():
    mono = Params(delta=0.1, epsilon=0.5, r=1.0, law="monostable")
    bist = Params(delta=0.1, epsilon=0.5, r=1.0, law="bistable", a=0.25)
    assert reproduction_rate(0.0, mono) == pytest.approx(1.0)
    assert reproduction_rate(1.0, mono) == pytest.approx(0.0)
    assert reproduction_rate(0.25, bist) == pytest.approx(0.0)
    assert reproduction_rate(1.0, bist) == pytest.approx(0.0)
    assert reproduction_rate(0.5, bist) == pytest.approx(0.125)


def test_rate_derivative_matches_finite_difference():
    bist = Params(delta=0.1, epsilon=0.5, r=1.0, law="bistable", a=0.3)
    u = np.linspace(-0.5, 1.5, 11)
    eps = 1e-6
    fd = (reproduction_rate(u + eps, bist)
          - reproduction_rate(u - eps, bist)) / (2 * eps)
    np.testing.assert_allclose(reproduction_rate_deriv(u, bist), fd,
                               atol=1e-8)


def test_reaction_includes_rate_factor():
    p = Params(delta=0.0, epsilon=1.0, r=2.5, law="monostable")
    assert reaction(0.5, p) == pytest.approx(2.5 * 0.5 * 0.5)


def test_reaction_lipschitz_monostable():
    p = Params(delta=0.0, epsilon=1.0, r=1.0, law="monostable")
    # d/du (u - u^2) = 1 - 2u, so the sup over [0, 1] is 1
    assert reaction_lipschitz(p, 0.0, 1.0) == pytest.approx(1.0)
    assert reaction_lipschitz(p, 0.0, 2.0) == pytest.approx(3.0)


def test_reaction_lipschitz_bistable_vertex():
    p = Params(delta=0.0, epsilon=1.0, r=1.0, law="bistable", a=0.5)
    got = reaction_lipschitz(p, 0.0, 1.0)
    us = np.linspace(0.0, 1.0, 20001)
    dense = np.max(np.abs(-3 * us ** 2 + 2 * 1.5 * us - 0.5))
    assert got == pytest.approx(dense, rel=1e-6)
    # swapped interval endpoints are tolerated
    assert reaction_lipschitz(p, 1.0, 0.0) == pytest.approx(got)


def test_ic_preset_validation():
    with pytest.raises(ValidationError):
        InitialCondition(preset="spike")
    with pytest.raises(ValidationError):
        InitialCondition(preset="constant", value=-1.0)
    with pytest.raises(ValidationError):
        InitialCondition(preset="bump", width=0.0)
    with pytest.raises(ValidationError):
        InitialCondition(preset="bump", baseline=-0.1)
    with pytest.raises(ValidationError):
        InitialCondition(preset="smoothed_step", lower=-0.2)
    with pytest.raises(ValidationError):
        InitialCondition(preset="random_fourier", modes=0)


def test_build_constant_and_bump():
    g = Grid(64)
    u0 = build_initial(InitialCondition(preset="constant", value=0.3), g)
    np.testing.assert_allclose(u0, 0.3)

    ic = InitialCondition(preset="bump", center=0.2, width=0.3,
                          amplitude=0.7, baseline=0.1)
    u0 = build_initial(ic, g)
    assert u0.min() >= 0.1
    assert u0.max() == pytest.approx(0.8, abs=1e-3)
    assert abs(g.centers[np.argmax(u0)] - 0.2) < g.h


def test_build_smoothed_step_monotone():
    g = Grid(64)
    ic = InitialCondition(preset="smoothed_step", center=0.0, width=0.2,
                          lower=0.2, upper=1.0)
    u0 = build_initial(ic, g)
    assert np.all(np.diff(u0) >= 0.0)
    assert u0[0] == pytest.approx(0.2, abs=1e-3)
    assert u0[-1] == pytest.approx(1.0, abs=1e-3)


def test_build_random_fourier_deterministic_and_bounded():
    g = Grid(128)
    ic = InitialCondition(preset="random_fourier", seed=7, modes=5,
                          baseline=0.1, amplitude=0.6)
    a = build_initial(ic, g)
    b = build_initial(ic, g)
    np.testing.assert_array_equal(a, b)
    assert a.min() == pytest.approx(0.1)
    assert a.max() == pytest.approx(0.7)

    other = build_initial(
        InitialCondition(preset="random_fourier", seed=8, modes=5,
                         baseline=0.1, amplitude=0.6), g)
    assert not np.array_equal(a, other)
