"""The headline studies: vanishing-diffusion sweep, manufactured-solution
order study, and the Gronwall stability probe.

All three return plain report dataclasses that cli_io serializes; nothing
here writes files or prints.  Runs inside a study share one dt schedule
(dt_max must bind, which the sweep verifies), so states are compared at
identical times and the implicit treatment of diffusion guarantees the
schedule is admissible for every delta.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import linregress

from .errors import ValidationError
from .estimates import (CheckResult, check_derivative_norms,
                        check_energy_bistable, check_entropy_monostable,
                        max_in_time_norms)
from .grid import Grid, norm_l1, norm_l2, norm_sup
from .model import InitialCondition, Params, build_initial, reproduction_rate, \
    reproduction_rate_deriv
from .stepping import StepControl, run
from .velocity import solve_helmholtz

SWEEP_REFERENCES = ("transport", "richardson", "smallest_delta")


# ---------------------------------------------------------------------------
# vanishing-diffusion sweep

@dataclass
class SweepReport:
    """Errors against the zero-diffusion reference, per delta and time."""

    law: str
    deltas: list[float]
    times: list[float]
    errors: np.ndarray          # shape (len(deltas), len(times)), sup norm
    floor: float                # upwind diffusion floor h max|phi| / 2
    fitted_p: list[float]       # log-log slope per comparison time
    fit_counts: list[int]       # how many deltas (above floor) entered each fit
    monotone: list[bool]        # strictly decreasing above the floor, per time
    monotone_all: list[bool]    # strictly decreasing over every delta, per time
    uniformity: CheckResult
    norms_by_delta: dict
    reference: str
    schedule_ok: bool
    diverged: list[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (not self.diverged and self.schedule_ok
                and all(self.monotone) and all(p > 0.0 for p in self.fitted_p)
                and self.uniformity.passed)


def _sweep_run(args):
    ic, params, control, grid, times = args
    tr = run(ic, params, control, grid,
             snapshot_stride=10 ** 9, record_times=times)
    if tr.diverged:
        return {"delta": params.delta, "error": tr.error}
    return {
        "delta": params.delta,
        "times_full": tr.times,
        "states": [tr.snapshot_at(t).u for t in times],
        "norms": max_in_time_norms(tr),
        "max_phi_sup": float(tr.series("phi_sup").max()),
    }


def delta_sweep(ic, base_params: Params, deltas, times, control: StepControl,
                grid: Grid, *, kappa: float = 3.0,
                reference: str = "transport", workers: int = 1) -> SweepReport:
    """Compare solutions across deltas against a vanishing-diffusion reference.

    deltas must be strictly decreasing inside (0, 1).  The reference is the
    delta = 0 transport solution on the same grid (default), a
    Richardson-style transport solution computed on the doubled grid and
    averaged back ("richardson"), or the smallest-delta run itself
    ("smallest_delta", which is then excluded from the comparison set).

    The sup-norm errors at each comparison time must decrease strictly in
    delta above the upwind diffusion floor h max|phi| / 2; the log-log
    slope p is fitted on that range.  Max-in-time derivative norms feed the
    delta-uniformity check with ratio bound kappa.
    """
    deltas = [float(d) for d in deltas]
    if len(deltas) < 2:
        raise ValidationError("sweep needs at least two delta values")
    if any(not 0.0 < d < 1.0 for d in deltas):
        raise ValidationError(f"sweep deltas must lie in (0, 1), got {deltas}")
    if any(d2 >= d1 for d1, d2 in zip(deltas, deltas[1:])):
        raise ValidationError(
            f"sweep deltas must be strictly decreasing, got {deltas}")
    if reference not in SWEEP_REFERENCES:
        raise ValidationError(
            f"reference must be one of {SWEEP_REFERENCES}, got {reference!r}")
    times = [float(t) for t in times]
    if any(not 0.0 < t <= control.t_end + 1e-12 for t in times):
        raise ValidationError(
            f"comparison times must lie in (0, t_end], got {times}")

    jobs = []
    ref_grid = grid
    if reference == "transport":
        jobs.append((ic, replace(base_params, delta=0.0), control, grid, times))
    elif reference == "richardson":
        ref_grid = Grid(2 * grid.n)
        jobs.append((ic, replace(base_params, delta=0.0), control, ref_grid,
                     times))
    compare_deltas = deltas if reference != "smallest_delta" else deltas[:-1]
    for d in deltas:
        jobs.append((ic, replace(base_params, delta=d), control, grid, times))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_run, jobs))
    else:
        results = [_sweep_run(job) for job in jobs]

    diverged = [res["delta"] for res in results if "error" in res]
    if diverged:
        return SweepReport(
            law=base_params.law, deltas=deltas, times=times,
            errors=np.full((len(deltas), len(times)), np.nan),
            floor=np.nan, fitted_p=[], fit_counts=[], monotone=[],
            monotone_all=[],
            uniformity=CheckResult(
                name="derivative_norms_uniformity", law=base_params.law,
                passed=False, worst_margin=-np.inf, time_of_worst=np.nan,
                tolerance=0.0, details={"error": "diverged runs"}),
            norms_by_delta={}, reference=reference, schedule_ok=False,
            diverged=diverged)

    if reference == "smallest_delta":
        ref = results[-1]
        delta_results = results[:-1]
    else:
        ref = results[0]
        delta_results = results[1:]

    ref_states = ref["states"]
    if reference == "richardson":
        # exact cell-average restriction from the doubled grid
        ref_states = [0.5 * (u[0::2] + u[1::2]) for u in ref_states]

    schedule_ok = all(
        res["times_full"].shape == ref["times_full"].shape
        and np.array_equal(res["times_full"], ref["times_full"])
        for res in delta_results)

    errors = np.empty((len(compare_deltas), len(times)))
    for i, res in enumerate(delta_results):
        for j in range(len(times)):
            errors[i, j] = norm_sup(res["states"][j] - ref_states[j], grid)

    floor = 0.5 * grid.h * ref["max_phi_sup"]
    fitted_p, fit_counts, monotone, monotone_all = [], [], [], []
    darr = np.array(compare_deltas)
    for j in range(len(times)):
        col = errors[:, j]
        above = darr >= floor
        sel = above if above.sum() >= 2 else np.ones_like(above, dtype=bool)
        fit = linregress(np.log(darr[sel]), np.log(np.maximum(col[sel], 1e-300)))
        fitted_p.append(float(fit.slope))
        fit_counts.append(int(sel.sum()))
        monotone.append(bool(np.all(np.diff(col[above]) < 0.0))
                        if above.sum() >= 2 else True)
        monotone_all.append(bool(np.all(np.diff(col) < 0.0)))

    norms_by_delta = {res["delta"]: res["norms"] for res in delta_results}
    uniformity = check_derivative_norms(norms_by_delta, kappa=kappa,
                                        law=base_params.law)
    return SweepReport(
        law=base_params.law, deltas=compare_deltas, times=times,
        errors=errors, floor=float(floor), fitted_p=fitted_p,
        fit_counts=fit_counts, monotone=monotone, monotone_all=monotone_all,
        uniformity=uniformity, norms_by_delta=norms_by_delta,
        reference=reference, schedule_ok=schedule_ok)


# ---------------------------------------------------------------------------
# manufactured-solution order study

@dataclass
class OrderReport:
    """Errors and fitted orders from simultaneous (h, dt) refinement."""

    law: str
    resolutions: list[int]
    hs: list[float]
    dts: list[float]
    coupled_l2: list[float]
    coupled_sup: list[float]
    phi_sup_err: list[float]
    coupled_order: float
    coupled_r2: float
    elliptic_sup: list[float]
    elliptic_order: float
    elliptic_r2: float
    monotone_coupled: bool
    monotone_elliptic: bool


def _manufactured_u(x, t):
    return 2.0 + np.exp(-t) * np.cos(np.pi * x)


def _manufactured_phi(x, t):
    return np.exp(-t) * np.sin(np.pi * x)


def mms_order_study(params: Params, resolutions, *, t_final: float = 0.5,
                    dt_over_h: float = 0.2, flux_limiter: str = "minmod",
                    velocity_resolve: bool = True) -> OrderReport:
    """Convergence orders against the manufactured pair

        u*(x, t)   = 2 + e^{-t} cos(pi x)     (zero wall derivative),
        phi*(x, t) = e^{-t} sin(pi x)         (zero wall values).

    Compensating sources are added to both equations so (u*, phi*) solves
    the discrete system's continuum limit exactly.  The coupled solve is
    refined with dt proportional to h; the elliptic solve alone is second
    order.

    The defaults measure the limited configuration (minmod reconstruction
    plus velocity re-solve averaging), which fits a slope comfortably above
    one.  Plain first-order upwind converges at rate one as well, but its
    error constant still grows as h shrinks over practical resolutions
    (ratios approach 2 from below), so a log-log fit lands slightly under
    1.0 however fine the grids; pass flux_limiter="upwind",
    velocity_resolve=False to observe that regime.
    """
    resolutions = [int(n) for n in resolutions]
    if len(resolutions) < 3:
        raise ValidationError("order study needs at least 3 resolutions")
    if any(n2 <= n1 for n1, n2 in zip(resolutions, resolutions[1:])):
        raise ValidationError(
            f"resolutions must be strictly increasing, got {resolutions}")
    if not 0.0 < dt_over_h <= 0.9:
        raise ValidationError(
            f"dt_over_h must lie in (0, 0.9], got {dt_over_h}")
    if not t_final > 0.0:
        raise ValidationError(f"t_final must be positive, got {t_final}")

    eps = params.epsilon

    def source_u(x, t):
        u = _manufactured_u(x, t)
        phi = _manufactured_phi(x, t)
        du_dt = -np.exp(-t) * np.cos(np.pi * x)
        d2u = -np.pi ** 2 * np.exp(-t) * np.cos(np.pi * x)
        du = -np.pi * np.exp(-t) * np.sin(np.pi * x)
        dphi = np.pi * np.exp(-t) * np.cos(np.pi * x)
        transport = du * phi + u * dphi
        react = params.r * u * reproduction_rate(u, params)
        return du_dt - params.delta * d2u + transport - react

    def source_phi(x, t):
        u = _manufactured_u(x, t)
        du = -np.pi * np.exp(-t) * np.sin(np.pi * x)
        helmholtz = (eps * np.pi ** 2 + 1.0) * _manufactured_phi(x, t)
        return helmholtz - reproduction_rate_deriv(u, params) * du

    hs, dts, errs_l2, errs_sup, phi_errs = [], [], [], [], []
    for n in resolutions:
        g = Grid(n)
        control = StepControl(t_end=t_final, dt_max=dt_over_h * g.h,
                              flux_limiter=flux_limiter,
                              velocity_resolve=velocity_resolve)
        tr = run(_manufactured_u(g.centers, 0.0), params, control, g,
                 snapshot_stride=10 ** 9, record_times=(t_final,),
                 density_source=source_u, velocity_extra_source=source_phi)
        if tr.diverged:
            raise ValidationError(
                f"manufactured run diverged at n={n}: {tr.error}")
        snap = tr.snapshot_at(t_final)
        exact = _manufactured_u(g.centers, t_final)
        errs_l2.append(norm_l2(snap.u - exact, g))
        errs_sup.append(norm_sup(snap.u - exact, g))
        phi_errs.append(norm_sup(snap.phi - _manufactured_phi(g.centers,
                                                              t_final), g))
        hs.append(g.h)
        dts.append(control.dt_max)

    # elliptic problem alone: -eps phi'' + phi = (eps pi^2 + 1) sin(pi x)
    ell_errs = []
    for n in resolutions:
        g = Grid(n)
        rhs = (eps * np.pi ** 2 + 1.0) * np.sin(np.pi * g.centers)
        phi = solve_helmholtz(rhs, eps, g)
        ell_errs.append(norm_sup(phi - np.sin(np.pi * g.centers), g))

    fit = linregress(np.log(hs), np.log(errs_l2))
    ell_fit = linregress(np.log(hs), np.log(ell_errs))
    return OrderReport(
        law=params.law, resolutions=resolutions, hs=hs, dts=dts,
        coupled_l2=errs_l2, coupled_sup=errs_sup, phi_sup_err=phi_errs,
        coupled_order=float(fit.slope), coupled_r2=float(fit.rvalue ** 2),
        elliptic_sup=ell_errs, elliptic_order=float(ell_fit.slope),
        elliptic_r2=float(ell_fit.rvalue ** 2),
        monotone_coupled=bool(np.all(np.diff(errs_l2) < 0.0)),
        monotone_elliptic=bool(np.all(np.diff(ell_errs) < 0.0)))


# ---------------------------------------------------------------------------
# Gronwall stability probe

@dataclass
class StabilityReport:
    """L1 separation growth under initial perturbations of the transport run."""

    law: str
    etas: list[float]
    times: np.ndarray
    separations: np.ndarray     # shape (len(etas), len(times))
    initial_separations: list[float]
    c_hat: float
    envelope_margin: float      # min over eta, t of envelope - separation
    envelope_ok: bool
    linearity_ratios: list[float]
    linearity_ok: bool
    envelope_slack: float
    linearity_tol: float

    @property
    def passed(self) -> bool:
        return self.envelope_ok and self.linearity_ok


def gronwall_stability(ic, params: Params, etas, control: StepControl,
                       grid: Grid, *, center: float = 0.3, width: float = 0.25,
                       n_times: int = 10, envelope_slack: float = 0.05,
                       linearity_tol: float = 0.2) -> StabilityReport:
    """Perturb the initial profile by eta * bump and track L1 separation.

    The transport system (delta = 0) admits a Gronwall bound
    s(t) <= s(0) e^{C t} on the L1 distance of two solutions with a
    constant uniform over the data.  C_hat is fitted on the smallest eta
    (the closest-to-linear regime) and the envelope, inflated by
    envelope_slack, must hold for every eta.  s(T)/eta must also be
    eta-independent within linearity_tol between successive etas.
    """
    if params.delta != 0.0:
        raise ValidationError(
            f"stability probe requires delta = 0, got {params.delta}")
    etas = [float(e) for e in etas]
    if len(etas) < 2:
        raise ValidationError("stability probe needs at least two etas")
    if any(not e > 0.0 for e in etas):
        raise ValidationError(f"etas must be positive, got {etas}")
    etas = sorted(etas, reverse=True)
    if not control.t_end > 0.0:
        raise ValidationError("stability probe needs t_end > 0")

    times = np.linspace(control.t_end / n_times, control.t_end, n_times)
    u0 = (build_initial(ic, grid) if isinstance(ic, InitialCondition)
          else grid.check_field(ic, "initial").copy())
    shape = np.exp(-(((grid.centers - center) / width) ** 2))

    def states_of(u_init):
        tr = run(u_init, params, control, grid,
                 snapshot_stride=10 ** 9, record_times=times)
        if tr.diverged:
            raise ValidationError(f"stability run diverged: {tr.error}")
        return [tr.snapshot_at(t).u for t in times]

    base_states = states_of(u0)
    separations = np.empty((len(etas), times.size))
    s0 = []
    for i, eta in enumerate(etas):
        states = states_of(u0 + eta * shape)
        s0.append(norm_l1(eta * shape, grid))
        for j in range(times.size):
            separations[i, j] = norm_l1(states[j] - base_states[j], grid)

    # fit on the smallest eta; C is nonnegative in the Gronwall statement
    i_small = len(etas) - 1
    with np.errstate(divide="ignore"):
        rates = np.log(separations[i_small] / s0[i_small]) / times
    c_hat = float(max(0.0, np.nanmax(rates)))

    envelopes = np.array(s0)[:, None] * np.exp(c_hat * times)[None, :]
    margins = envelopes * (1.0 + envelope_slack) - separations
    envelope_margin = float(margins.min())
    envelope_ok = bool(envelope_margin >= 0.0)

    finals = separations[:, -1] / np.array(etas)
    ratios = [float(finals[i] / finals[i + 1]) for i in range(len(etas) - 1)]
    linearity_ok = all(abs(rr - 1.0) <= linearity_tol for rr in ratios)

    return StabilityReport(
        law=params.law, etas=etas, times=times, separations=separations,
        initial_separations=s0, c_hat=c_hat,
        envelope_margin=envelope_margin, envelope_ok=envelope_ok,
        linearity_ratios=ratios, linearity_ok=linearity_ok,
        envelope_slack=envelope_slack, linearity_tol=linearity_tol)


# ---------------------------------------------------------------------------
# refinement of the energy/entropy identity defect

def defect_refinement(ic: InitialCondition, params: Params,
                      control: StepControl, grid: Grid,
                      levels: int = 2) -> list[dict]:
    """Identity-residual sizes under simultaneous (h, dt) halving.

    Returns one entry per level with n, h, dt_max and the energy or entropy
    identity residual; the residual should shrink roughly linearly, which
    the acceptance suite asserts as a ratio between consecutive levels.
    """
    if not isinstance(ic, InitialCondition):
        raise ValidationError(
            "defect_refinement resamples the initial profile per grid; "
            "pass an InitialCondition preset")
    out = []
    for level in range(levels):
        g = Grid(grid.n * 2 ** level)
        ctl = replace(control, dt_max=control.dt_max / 2 ** level)
        tr = run(ic, params, ctl, g, snapshot_stride=10 ** 9)
        if tr.diverged:
            raise ValidationError(
                f"refinement run diverged at n={g.n}: {tr.error}")
        if params.bistable:
            res = check_energy_bistable(tr, params)
        else:
            res = check_entropy_monostable(tr, params)
        out.append({
            "n": g.n, "h": g.h, "dt_max": ctl.dt_max,
            "identity_residual": res.details["identity_residual"],
            "worst_margin": res.worst_margin,
            "passed": res.passed,
            "tolerance": res.tolerance,
        })
    return out
