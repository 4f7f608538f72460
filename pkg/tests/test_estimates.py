"""Trajectory-level inequality checks and the cross-diffusion uniformity check."""

import numpy as np
import pytest

from driftcluster import (Grid, Params, StepControl, run,
                          check_derivative_norms, check_energy_bistable,
                          check_entropy_monostable, check_gradient_bounds,
                          check_mass_bound, run_trajectory_checks)
from driftcluster.errors import ValidationError
from driftcluster.estimates import (_cumulative, max_in_time_norms,
                                    EstimateReport)
from driftcluster.stepping import DIAGNOSTICS, Trajectory


def _fake_trajectory(mass_values, r=0.0, dt=0.1, law="monostable", **pkw):
    n_rows = len(mass_values)
    g = Grid(8)
    p = Params(delta=0.0, epsilon=1.0, r=r, law=law, **pkw)
    c = StepControl(t_end=dt * (n_rows - 1), dt_max=dt)
    data = np.zeros((n_rows, len(DIAGNOSTICS)))
    data[:, DIAGNOSTICS.index("mass")] = mass_values
    data[:, DIAGNOSTICS.index("u_l1")] = np.abs(mass_values)
    times = np.arange(n_rows) * dt
    dts = np.full(n_rows - 1, dt)
    return Trajectory(grid=g, params=p, control=c, times=times, dts=dts,
                      data=data, snapshots=[], diverged=False, error=None), p


def test_mass_bound_accepts_constant_mass():
    tr, p = _fake_trajectory([1.0, 1.0, 1.0])
    res = check_mass_bound(tr, p)
    assert res.passed
    assert res.name == "mass_bound"


def test_mass_bound_rejects_spurious_growth():
    tr, p = _fake_trajectory([1.0, 1.5, 2.0])
    res = check_mass_bound(tr, p)
    assert not res.passed
    assert res.worst_margin < 0.0


def test_mass_bound_allows_reactive_growth():
    # monostable growth rate is capped by 2 r: mass may rise that fast
    tr, p = _fake_trajectory([1.0, 1.1, 1.2], r=1.0)
    assert check_mass_bound(tr, p).passed


def test_cumulative_left_rule():
    dts = np.array([0.5, 0.5, 1.0])
    vals = np.array([2.0, 4.0, 6.0, 100.0])  # the last value never enters
    np.testing.assert_allclose(_cumulative(dts, vals),
                               [0.0, 1.0, 3.0, 9.0])


@pytest.fixture(scope="module")
def bistable_run():
    g = Grid(100)
    p = Params(delta=0.01, epsilon=0.5, r=1.0, law="bistable", a=0.25)
    from driftcluster import InitialCondition
    ic = InitialCondition(preset="bump", center=0.0, width=0.5,
                          amplitude=0.8, baseline=0.1)
    return run(ic, p, StepControl(t_end=0.5, dt_max=5e-4), g,
               snapshot_stride=50), p


@pytest.fixture(scope="module")
def monostable_run():
    g = Grid(100)
    p = Params(delta=0.01, epsilon=0.5, r=1.0, law="monostable")
    from driftcluster import InitialCondition
    ic = InitialCondition(preset="bump", center=0.0, width=0.5,
                          amplitude=0.8, baseline=0.3)
    return run(ic, p, StepControl(t_end=0.5, dt_max=5e-4), g,
               snapshot_stride=50), p


def test_energy_check_passes_on_faithful_run(bistable_run):
    tr, p = bistable_run
    res = check_energy_bistable(tr, p)
    assert res.passed
    assert res.tolerance > 0.0
    assert "identity_residual" in res.details
    assert res.details["identity_residual"] < res.tolerance


def test_energy_check_rejects_monostable_input(monostable_run):
    tr, p = monostable_run
    with pytest.raises(ValidationError):
        check_energy_bistable(tr, p)


def test_entropy_check_passes_on_faithful_run(monostable_run):
    tr, p = monostable_run
    res = check_entropy_monostable(tr, p)
    assert res.passed
    assert "identity_residual" in res.details


def test_gradient_check_passes_and_reports_forms(bistable_run):
    tr, p = bistable_run
    res = check_gradient_bounds(tr, p)
    assert res.passed
    assert res.worst_margin >= -1e-6
    assert np.isfinite(res.details["statement_margin"])
    assert isinstance(res.details["growth_flag"], bool)


def test_uniformity_check_ratio_logic():
    norms = {
        0.1: {"u_sup": 1.0, "grad_u_l1": 2.0, "grad_u_l2": 3.0,
              "grad_phi_sup": 0.5},
        0.01: {"u_sup": 1.2, "grad_u_l1": 2.5, "grad_u_l2": 3.5,
               "grad_phi_sup": 0.6},
    }
    assert check_derivative_norms(norms, kappa=3.0).passed
    norms[0.01]["grad_u_l2"] = 30.0
    res = check_derivative_norms(norms, kappa=3.0)
    assert not res.passed
    assert "grad_u_l2" in res.details["worst_norm"]


def test_uniformity_check_handles_near_zero_norms():
    norms = {0.1: {"u_sup": 0.0, "grad_u_l1": 0.0, "grad_u_l2": 0.0,
                   "grad_phi_sup": 0.0},
             0.01: {"u_sup": 0.0, "grad_u_l1": 0.0, "grad_u_l2": 0.0,
                    "grad_phi_sup": 0.0}}
    assert check_derivative_norms(norms, kappa=3.0).passed


def test_max_in_time_norms_keys(bistable_run):
    tr, _ = bistable_run
    norms = max_in_time_norms(tr)
    for key in ("u_sup", "grad_u_l1", "grad_u_l2", "grad_phi_sup"):
        assert key in norms
        assert norms[key] >= 0.0


def test_full_report_law_dispatch(bistable_run, monostable_run):
    tr_b, p_b = bistable_run
    rep = run_trajectory_checks(tr_b, p_b)
    names = [c.name for c in rep.checks]
    assert names == ["mass_bound", "energy", "gradient_bounds"]
    assert rep.passed
    assert rep["energy"].law == "bistable"

    tr_m, p_m = monostable_run
    rep_m = run_trajectory_checks(tr_m, p_m)
    assert [c.name for c in rep_m.checks] == ["mass_bound", "entropy",
                                              "gradient_bounds"]
    assert rep_m.passed


def test_report_rejects_duplicate_names(bistable_run):
    tr, p = bistable_run
    res = check_mass_bound(tr, p)
    with pytest.raises(ValidationError):
        EstimateReport(checks=[res, res])


def test_report_lookup_unknown_name(bistable_run):
    tr, p = bistable_run
    rep = run_trajectory_checks(tr, p)
    with pytest.raises(KeyError):
        rep["does_not_exist"]
