"""Machine checks of the a priori bounds along a computed trajectory.

Each check turns one of the model's provable estimates into a margin:
margin >= 0 means the bound holds, and a check passes when the worst margin
over the whole trajectory stays above -tolerance.  Tolerances scale with
(dt + h) where the estimate is exact only in the continuum; enlarging a
tolerance can never flip a pass into a fail.

Two kinds of bound appear:

* explicit envelopes (mass growth, the L2 energy and entropy budgets and
  their Gronwall envelopes, the one-sided velocity-gradient bound): these
  are evaluated literally, constants and all;
* existence-only bounds on derivative norms, where the theory asserts a
  constant independent of delta but never names it: these become a
  delta-uniformity check, max-in-time norms across a sweep may differ by
  at most a factor kappa.

Alongside each integrated inequality the checker also forms the *identity*
residual, the defect of the discrete energy/entropy balance before any
term is dropped.  The inequality margins contain genuine slack (the proofs
discard positive terms), so the identity residual is the quantity that
must shrink under mesh refinement, and refinement studies use it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .model import Params
from .stepping import Trajectory
from .velocity import gradient_lower_bound_margin

#: tolerance = coeff * (max dt + h) * problem scale, see each check
ENERGY_TOL_COEFF = 10.0
ENTROPY_TOL_COEFF = 10.0
GRADIENT_TOL = 1e-6
MASS_TOL_COEFF = 0.1


@dataclass
class CheckResult:
    name: str
    law: str
    passed: bool
    worst_margin: float
    time_of_worst: float
    tolerance: float
    details: dict = field(default_factory=dict)


@dataclass
class EstimateReport:
    checks: list[CheckResult]

    def __post_init__(self):
        names = [c.name for c in self.checks]
        if len(names) != len(set(names)):
            raise ValidationError(f"duplicate check names in report: {names}")

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _cumulative(dts: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Left-rule running integral: out[k] = sum_{j<k} dt_j values[j]."""
    if dts.size == 0:
        return np.zeros(1)
    return np.concatenate(([0.0], np.cumsum(dts * values[:-1])))


def _worst(margins: np.ndarray, times: np.ndarray):
    k = int(np.argmin(margins))
    return float(margins[k]), float(times[k])


def _require_finite(tr: Trajectory, name: str) -> CheckResult | None:
    if tr.diverged or not np.isfinite(tr.data).all():
        return CheckResult(
            name=name, law=tr.params.law, passed=False,
            worst_margin=-np.inf, time_of_worst=float(tr.times[-1]),
            tolerance=0.0, details={"error": tr.error or "non-finite data"})
    return None


def check_mass_bound(tr: Trajectory, params: Params) -> CheckResult:
    """Linear-in-time envelope on ||u(t)||_1.

    The reaction gains at most 2 r (1 - a) (bistable) or 2 r (monostable)
    mass per unit time; transport and diffusion gain none.
    """
    bad = _require_finite(tr, "mass_bound")
    if bad is not None:
        return bad
    rate = 2.0 * params.r * ((1.0 - params.a) if params.bistable else 1.0)
    m = tr.series("u_l1")
    envelope = m[0] + rate * tr.times
    margins = envelope - m
    worst, at = _worst(margins, tr.times)
    max_dt = float(tr.dts.max()) if tr.dts.size else 0.0
    tol = 1e-8 + MASS_TOL_COEFF * params.r * max_dt
    return CheckResult(
        name="mass_bound", law=params.law, passed=worst >= -tol,
        worst_margin=worst, time_of_worst=at, tolerance=tol,
        details={"rate": rate, "initial_mass": float(m[0]),
                 "final_mass": float(m[-1])})


def check_energy_bistable(tr: Trajectory, params: Params) -> CheckResult:
    """Integrated L2 energy inequality and its Gronwall envelope.

    Budget form, from the balance of the u- and phi-equations:

        ||u(T)||_2^2 + int_0^T [(eps/2)||phi_x||_2^2 + ||phi||_2^2
                                + 2 delta ||u_x||_2^2] dt
            <= ||u_0||_2^2 + int_0^T [alpha ||u||_2^2 + 4 r (1 - a)] dt,

    with alpha = (a+1)^2 / (2 eps), and the envelope it implies:

        ||u(t)||_2^2 <= (||u_0||_2^2 + 4 r (1 - a) t) e^{alpha t}.

    The details carry the defect of the pre-inequality identity

        d/dt ||u||_2^2 + 2 delta ||u_x||_2^2 + eps ||phi_x||_2^2
            + ||phi||_2^2 = 2 r int u^2 E(u) + (a+1) int phi u_x,

    which has no slack and must shrink with (dt, h).
    """
    if not params.bistable:
        raise ValidationError("energy check applies to the bistable law")
    bad = _require_finite(tr, "energy")
    if bad is not None:
        return bad
    eps = params.epsilon
    alpha = (params.a + 1.0) ** 2 / (2.0 * eps)
    gain = 4.0 * params.r * (1.0 - params.a)
    t = tr.times
    u2 = tr.series("u_l2") ** 2
    diss_budget = (0.5 * eps * tr.series("grad_phi_l2") ** 2
                   + tr.series("phi_l2") ** 2
                   + 2.0 * params.delta * tr.series("grad_u_l2") ** 2)
    lhs = u2 + _cumulative(tr.dts, diss_budget)
    rhs = u2[0] + _cumulative(tr.dts, alpha * u2 + gain)
    budget_margins = rhs - lhs

    envelope = (u2[0] + gain * t) * np.exp(alpha * t)
    envelope_margins = envelope - u2

    diss_id = (eps * tr.series("grad_phi_l2") ** 2
               + tr.series("phi_l2") ** 2
               + 2.0 * params.delta * tr.series("grad_u_l2") ** 2)
    residual = (u2 - u2[0] + _cumulative(tr.dts, diss_id)
                - _cumulative(tr.dts, tr.series("reaction_budget")))

    margins = np.minimum(budget_margins, envelope_margins)
    worst, at = _worst(margins, t)
    max_dt = float(tr.dts.max()) if tr.dts.size else 0.0
    scale = (1.0 + alpha) * (1.0 + float(u2.max()))
    tol = ENERGY_TOL_COEFF * scale * (max_dt + tr.grid.h)
    return CheckResult(
        name="energy", law=params.law, passed=worst >= -tol,
        worst_margin=worst, time_of_worst=at, tolerance=tol,
        details={
            "budget_margin": float(budget_margins.min()),
            "envelope_margin": float(envelope_margins.min()),
            "identity_residual": float(np.abs(residual).max()),
            "alpha": alpha,
        })


def check_entropy_monostable(tr: Trajectory, params: Params) -> CheckResult:
    """Integrated entropy inequality for the logistic law.

    Budget form:

        int u log u (T) + int_0^T [eps ||phi_x||_2^2 + ||phi||_2^2
                                   + 4 delta ||(sqrt u)_x||_2^2] dt
            <= int u_0 log u_0 + 2 r T,

    with u log u = 0 at u = 0.  The identity residual (details) replaces
    2 r by the exact production r int (log u + 1) u E(u).
    """
    if params.bistable:
        raise ValidationError("entropy check applies to the monostable law")
    bad = _require_finite(tr, "entropy")
    if bad is not None:
        return bad
    eps = params.epsilon
    t = tr.times
    ent = tr.series("entropy")
    diss = (eps * tr.series("grad_phi_l2") ** 2
            + tr.series("phi_l2") ** 2
            + 4.0 * params.delta * tr.series("sqrt_u_grad_l2") ** 2)
    lhs = ent + _cumulative(tr.dts, diss)
    rhs = ent[0] + 2.0 * params.r * t
    margins = rhs - lhs
    residual = (ent - ent[0] + _cumulative(tr.dts, diss)
                - _cumulative(tr.dts, tr.series("reaction_budget")))
    worst, at = _worst(margins, t)
    max_dt = float(tr.dts.max()) if tr.dts.size else 0.0
    scale = (1.0 + params.r) * (1.0 + float(np.abs(ent).max()))
    tol = ENTROPY_TOL_COEFF * scale * (max_dt + tr.grid.h)
    return CheckResult(
        name="entropy", law=params.law, passed=worst >= -tol,
        worst_margin=worst, time_of_worst=at, tolerance=tol,
        details={"identity_residual": float(np.abs(residual).max())})


def check_gradient_bounds(tr: Trajectory, params: Params) -> CheckResult:
    """One-sided lower bound on the velocity gradient, plus a growth monitor.

    The twice-integrated velocity equation bounds phi_x from below by
    -(2/eps)||phi||_inf minus a law constant ((a+1)^2/(4 eps) +
    ||u||_2^2/(2 eps) bistable; ||u||_1/(2 eps) monostable).  Margins are
    evaluated per step from the diagnostics and re-evaluated exactly on
    every stored snapshot; the looser printed variant with 4||phi||_inf is
    reported in the details.  sup_t ||phi_x||_inf is monitored for growth
    beyond an exponential envelope fitted on the first half of the run
    (a no-blow-up flag, informational).
    """
    bad = _require_finite(tr, "gradient_bounds")
    if bad is not None:
        return bad
    eps = params.epsilon
    t = tr.times
    phi_sup = tr.series("phi_sup")
    if params.bistable:
        const = ((params.a + 1.0) ** 2 / (4.0 * eps)
                 + tr.series("u_l2") ** 2 / (2.0 * eps))
    else:
        const = tr.series("u_l1") / (2.0 * eps)
    step_margins = tr.series("grad_phi_min") + 2.0 / eps * phi_sup + const
    statement_margins = tr.series("grad_phi_min") + 4.0 * phi_sup + const

    snap_margin = np.inf
    for snap in tr.snapshots:
        m = gradient_lower_bound_margin(snap.phi, snap.u, params, tr.grid,
                                        form="proof")
        snap_margin = min(snap_margin, m)

    worst, at = _worst(step_margins, t)
    if snap_margin < worst:
        worst = float(snap_margin)

    growth_flag = False
    fitted_k = 0.0
    g = tr.series("grad_phi_sup")
    if t.size >= 8 and float(g.max()) > 1e-12:
        half = t.size // 2
        floor = 1e-12 * float(g.max())
        logg = np.log(np.maximum(g, floor))
        if t[half - 1] > 0.0:
            fit = np.polyfit(t[:half], logg[:half], 1)
            fitted_k = float(max(fit[0], 0.0))
            envelope = logg[half - 1] + fitted_k * (t[half:] - t[half - 1])
            growth_flag = bool((logg[half:] > envelope + np.log(2.0)).any())

    tol = GRADIENT_TOL
    return CheckResult(
        name="gradient_bounds", law=params.law, passed=worst >= -tol,
        worst_margin=worst, time_of_worst=at, tolerance=tol,
        details={
            "statement_margin": float(statement_margins.min()),
            "snapshot_margin": float(snap_margin) if tr.snapshots else np.nan,
            "growth_flag": growth_flag,
            "fitted_growth_rate": fitted_k,
            "sup_grad_phi": float(g.max()),
        })


#: norms whose delta-uniformity the theory asserts
UNIFORMITY_NORMS = ("u_sup", "grad_u_l1", "grad_u_l2", "grad_phi_sup")


def max_in_time_norms(tr: Trajectory) -> dict:
    """Max over the trajectory of each uniformity-checked norm."""
    return {name: float(tr.series(name).max()) for name in UNIFORMITY_NORMS}


def check_derivative_norms(norms_by_delta: dict, kappa: float = 3.0,
                           law: str = "") -> CheckResult:
    """delta-uniformity of the derivative-norm bounds.

    norms_by_delta maps delta -> {norm name -> max-in-time value} as
    produced by max_in_time_norms across a sweep.  The bounds' constants
    are existence-only, so the check asserts that each norm's max-in-time
    value varies by at most a factor kappa across the sweep.  Norms that
    are at roundoff for every delta count as ratio 1.
    """
    if len(norms_by_delta) < 2:
        raise ValidationError(
            "uniformity check needs at least two delta values")
    if not kappa >= 1.0:
        raise ValidationError(f"kappa must be at least 1, got {kappa}")
    ratios = {}
    for name in UNIFORMITY_NORMS:
        vals = np.array([norms_by_delta[d][name] for d in norms_by_delta])
        if not np.isfinite(vals).all():
            ratios[name] = np.inf
            continue
        if vals.max() <= 1e-10:
            ratios[name] = 1.0
            continue
        ratios[name] = float(vals.max() / max(vals.min(), 1e-300))
    worst_name = max(ratios, key=lambda k: ratios[k])
    worst_ratio = ratios[worst_name]
    margin = kappa - worst_ratio
    return CheckResult(
        name="derivative_norms_uniformity", law=law, passed=margin >= 0.0,
        worst_margin=float(margin), time_of_worst=np.nan, tolerance=0.0,
        details={"kappa": kappa, "worst_norm": worst_name, "ratios": ratios})


def run_trajectory_checks(tr: Trajectory, params: Params) -> EstimateReport:
    """All single-trajectory checks: mass, energy or entropy, gradients."""
    checks = [check_mass_bound(tr, params)]
    if params.bistable:
        checks.append(check_energy_bistable(tr, params))
    else:
        checks.append(check_entropy_monostable(tr, params))
    checks.append(check_gradient_bounds(tr, params))
    return EstimateReport(checks=checks)
