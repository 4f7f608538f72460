"""Time integration for the coupled density/velocity system.

Scheme: first-order IMEX Euler.  Advection (first-order upwind) and the
reaction r u E(u) are explicit; diffusion delta d2u/dx2 is implicit through
a Neumann tridiagonal solve.  The implicit diffusion is unconditionally
stable, so one dt schedule works for every delta and the vanishing-diffusion
sweep can compare runs at identical times.  For delta = 0 the implicit stage
is skipped entirely (pure transport); since the wall face velocities vanish,
that update consumes no boundary data for u.

The velocity is lagged: solved once from the current density and frozen over
the step.  StepControl.velocity_resolve enables one fixed-point re-solve
(step once, re-solve from the predicted density, redo the step with the
averaged field) as a coupling-sensitivity switch.

Positivity: with the upwind flux, every coefficient of the explicit update
is nonnegative provided per cell

    dt * [ (phi_{i+1/2}^+ + phi_{i-1/2}^-) / h + r max(0, -E(u_i)) ] <= 1,

and the implicit matrix is an M-matrix whose inverse preserves sign, so the
density stays nonnegative.  dt_limit computes that per-cell bound together
with the reaction Lipschitz bound 1/(r L_E); the controller applies
cfl_safety on top, and the step functions independently reject any dt above
the hard limit.

Both the explicit flux differencing and the implicit Neumann matrix have
zero column-sum defect, so for r = 0 the total mass is conserved to
roundoff per step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (CflViolationError, DivergenceError, DriftclusterError,
                     ValidationError)
from .grid import Grid, centered_gradient, norm_l1, norm_l2, norm_sup, total_mass
from .model import (InitialCondition, Params, build_initial, reaction_lipschitz,
                    reproduction_rate)
from .tridiag import TridiagonalSystem, thomas_solve
from .velocity import Velocity, gradient_values, solve_velocity

FLUX_LIMITERS = ("upwind", "minmod")

#: Per-state diagnostic columns, in the order they are written to CSV.
DIAGNOSTICS = (
    "mass", "u_l1", "u_l2", "u_sup", "u_min",
    "grad_u_l1", "grad_u_l2",
    "phi_l2", "phi_sup",
    "grad_phi_l2", "grad_phi_sup", "grad_phi_min",
    "entropy", "sqrt_u_grad_l2", "reaction_budget",
)


@dataclass(frozen=True)
class StepControl:
    """Time-stepping limits for one run.

    t_end = 0 is allowed and produces a single-state trajectory.
    """

    t_end: float
    dt_max: float
    cfl_safety: float = 0.9
    velocity_resolve: bool = False
    flux_limiter: str = "upwind"

    def __post_init__(self):
        if not self.t_end >= 0.0:
            raise ValidationError(f"t_end must be nonnegative, got {self.t_end}")
        if not self.dt_max > 0.0:
            raise ValidationError(f"dt_max must be positive, got {self.dt_max}")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValidationError(
                f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.flux_limiter not in FLUX_LIMITERS:
            raise ValidationError(
                f"flux_limiter must be one of {FLUX_LIMITERS}, "
                f"got {self.flux_limiter!r}")


@dataclass
class Snapshot:
    """Full state at one recorded time."""

    t: float
    u: np.ndarray
    phi: np.ndarray


@dataclass
class Trajectory:
    """Result of one run: per-step diagnostics plus strided snapshots.

    data has one row per recorded state (the initial state included, so
    len(times) == n_steps + 1) and one column per DIAGNOSTICS entry.
    A diverged run carries everything up to the last valid state plus an
    error message; it is flagged, never raised.
    """

    grid: Grid
    params: Params
    control: StepControl
    times: np.ndarray
    dts: np.ndarray
    data: np.ndarray
    snapshots: list[Snapshot] = field(default_factory=list)
    diverged: bool = False
    error: str | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.dts = np.asarray(self.dts, dtype=np.float64)
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.times.ndim != 1 or self.data.shape != (self.times.size,
                                                       len(DIAGNOSTICS)):
            raise ValidationError("diagnostics shape does not match times")
        if self.times.size and (np.diff(self.times) <= 0.0).any():
            raise ValidationError("trajectory times must be strictly increasing")

    @property
    def n_steps(self) -> int:
        return self.dts.size

    def series(self, name: str) -> np.ndarray:
        """Diagnostic time series by column name."""
        try:
            col = DIAGNOSTICS.index(name)
        except ValueError:
            raise ValidationError(f"unknown diagnostic {name!r}") from None
        return self.data[:, col]

    def snapshot_at(self, t: float) -> Snapshot:
        """Snapshot recorded at time t (within a 1e-9 relative window)."""
        tol = 1e-9 * max(1.0, abs(t))
        for snap in self.snapshots:
            if abs(snap.t - t) <= tol:
                return snap
        raise ValidationError(f"no snapshot recorded at t={t!r}")


def advective_flux(u, vel, grid: Grid, limiter: str = "upwind") -> np.ndarray:
    """Face fluxes for the drift term, zero at both walls.

    vel may be a Velocity or a bare (n + 1,) face-value array.  "upwind"
    is the positivity-preserving default; "minmod" adds a limited linear
    reconstruction (sharper fronts, no positivity guarantee) and is kept
    as an experimental cross-check.
    """
    u = grid.check_field(u, "u")
    faces = vel.face_values if isinstance(vel, Velocity) else np.asarray(vel)
    if faces.shape != (grid.n + 1,):
        raise ValidationError(
            f"face velocities have shape {faces.shape}, expected ({grid.n + 1},)")
    if limiter == "upwind":
        return kernels.upwind_fluxes(
            np.ascontiguousarray(u), np.ascontiguousarray(faces))
    if limiter != "minmod":
        raise ValidationError(
            f"flux_limiter must be one of {FLUX_LIMITERS}, got {limiter!r}")
    h = grid.h
    # limited slopes with reflecting ghosts (zero slope into the walls)
    dl = np.zeros(grid.n)
    dr = np.zeros(grid.n)
    dl[1:] = (u[1:] - u[:-1]) / h
    dr[:-1] = (u[1:] - u[:-1]) / h
    slope = np.where(dl * dr > 0.0, np.sign(dl) * np.minimum(np.abs(dl),
                                                             np.abs(dr)), 0.0)
    flux = np.zeros(grid.n + 1)
    v = faces[1:-1]
    left = u[:-1] + 0.5 * h * slope[:-1]
    right = u[1:] - 0.5 * h * slope[1:]
    flux[1:-1] = np.maximum(v, 0.0) * left + np.minimum(v, 0.0) * right
    return flux


def dt_limit(u, vel: Velocity, params: Params, grid: Grid) -> float:
    """Hard positivity/stability step limit (no safety factor applied).

    min over cells of 1 / [outflow rate + reaction sink rate], combined
    with the reaction Lipschitz bound 1 / (r L_E) over the running range.
    """
    u = grid.check_field(u, "u")
    faces = vel.face_values
    outflow = (np.maximum(faces[1:], 0.0)
               + np.maximum(-faces[:-1], 0.0)) / grid.h
    e = reproduction_rate(u, params)
    sink = params.r * np.maximum(0.0, -e)
    rate = float((outflow + sink).max())
    lo = min(0.0, float(u.min()))
    hi = max(1.0, float(u.max()))
    rate = max(rate, params.r * reaction_lipschitz(params, lo, hi))
    if rate <= 0.0:
        return np.inf
    return 1.0 / rate


def diffusion_system(rhs, nu: float, grid: Grid) -> TridiagonalSystem:
    """(I - nu D2_neumann) x = rhs; reflecting ghosts give unit column sums."""
    rhs = grid.check_field(rhs, "rhs")
    k = nu / grid.h ** 2
    diag = np.full(grid.n, 1.0 + 2.0 * k)
    diag[0] = 1.0 + k
    diag[-1] = 1.0 + k
    off = np.full(grid.n - 1, -k)
    return TridiagonalSystem(sub=off, diag=diag, sup=off.copy(), rhs=rhs)


def _explicit_stage(u, params: Params, dt: float, grid: Grid, vel: Velocity,
                    limiter: str, source) -> np.ndarray:
    hard = dt_limit(u, vel, params, grid)
    if dt > hard * (1.0 + 1e-9):
        raise CflViolationError(
            f"dt={dt:.6e} exceeds the positivity/stability limit {hard:.6e}")
    flux = advective_flux(u, vel, grid, limiter)
    u_star = kernels.explicit_update(
        np.ascontiguousarray(u), np.ascontiguousarray(flux),
        dt, grid.h, params.r, int(params.bistable), params.a)
    if source is not None:
        u_star = u_star + dt * grid.check_field(source, "source")
    return u_star


def step_transport(u, params: Params, dt: float, grid: Grid, *,
                   vel: Velocity | None = None, limiter: str = "upwind",
                   source=None) -> np.ndarray:
    """One explicit upwind transport + reaction step (delta = 0 only)."""
    if params.delta != 0.0:
        raise ValidationError(
            f"step_transport requires delta = 0, got {params.delta}")
    if not dt > 0.0:
        raise ValidationError(f"dt must be positive, got {dt}")
    u = grid.check_field(u, "u")
    if vel is None:
        vel = solve_velocity(u, params, grid)
    u_new = _explicit_stage(u, params, dt, grid, vel, limiter, source)
    if not np.isfinite(u_new).all():
        raise DivergenceError("non-finite density after transport step")
    return u_new


def step_imex(u, params: Params, dt: float, grid: Grid, *,
              vel: Velocity | None = None, limiter: str = "upwind",
              source=None) -> np.ndarray:
    """One IMEX step: explicit advection/reaction, implicit diffusion."""
    if params.delta <= 0.0:
        raise ValidationError(
            f"step_imex requires delta > 0, got {params.delta}; "
            "use step_transport")
    if not dt > 0.0:
        raise ValidationError(f"dt must be positive, got {dt}")
    u = grid.check_field(u, "u")
    if vel is None:
        vel = solve_velocity(u, params, grid)
    u_star = _explicit_stage(u, params, dt, grid, vel, limiter, source)
    u_new = thomas_solve(diffusion_system(u_star, params.delta * dt, grid))
    if not np.isfinite(u_new).all():
        raise DivergenceError("non-finite density after IMEX step")
    return u_new


def _entropy_density(u: np.ndarray) -> np.ndarray:
    # u log u with the value 0 at u = 0 (negative entries are clipped;
    # the scheme keeps u nonnegative, this guards roundoff only)
    safe = np.where(u > 0.0, u, 1.0)
    return np.where(u > 0.0, u * np.log(safe), 0.0)


def _diagnostics_row(u, vel: Velocity, params: Params, grid: Grid) -> np.ndarray:
    phi = vel.values
    grad_u = centered_gradient(u, grid)
    grad_phi = gradient_values(phi, grid)
    sqrt_grad = centered_gradient(np.sqrt(np.maximum(u, 0.0)), grid)
    if params.bistable:
        # right side of the discrete L2 energy balance
        budget = (2.0 * params.r * total_mass(u * u * reproduction_rate(u, params), grid)
                  + (params.a + 1.0) * total_mass(phi * grad_u, grid))
    else:
        # entropy production r (log u + 1) u E(u), zero where u = 0
        safe = np.where(u > 0.0, u, 1.0)
        prod = np.where(u > 0.0, (np.log(safe) + 1.0) * u * (1.0 - u), 0.0)
        budget = params.r * total_mass(prod, grid)
    return np.array([
        total_mass(u, grid),
        norm_l1(u, grid),
        norm_l2(u, grid),
        norm_sup(u, grid),
        float(u.min()),
        norm_l1(grad_u, grid),
        norm_l2(grad_u, grid),
        norm_l2(phi, grid),
        norm_sup(phi, grid),
        norm_l2(grad_phi, grid),
        norm_sup(grad_phi, grid),
        float(grad_phi.min()),
        total_mass(_entropy_density(u), grid),
        norm_l2(sqrt_grad, grid),
        float(budget),
    ])


def run(ic, params: Params, control: StepControl, grid: Grid,
        snapshot_stride: int = 10, record_times=(),
        density_source=None, velocity_extra_source=None) -> Trajectory:
    """Advance from the initial profile to t_end.

    ic is an InitialCondition preset or a bare nonnegative array.  Snapshots
    are kept every snapshot_stride-th step, at every time in record_times
    (each is hit exactly by shortening the step) and always at t = 0 and
    t_end.  The optional sources are callables (x, t) -> array adding to the
    density equation and to the velocity right-hand side; they exist for
    manufactured-solution studies.

    Divergence (non-finite values, collapsed dt, failed solve) flags the
    trajectory and truncates it at the last valid state.
    """
    if isinstance(ic, InitialCondition):
        u = build_initial(ic, grid)
    else:
        u = grid.check_field(ic, "initial").copy()
        if (u < 0.0).any():
            raise ValidationError("initial density must be nonnegative")
    if snapshot_stride < 1:
        raise ValidationError(
            f"snapshot_stride must be at least 1, got {snapshot_stride}")

    eps_t = 1e-12 * max(1.0, control.t_end)
    targets = []
    for t_rec in sorted(set(float(t) for t in record_times)):
        if not 0.0 < t_rec <= control.t_end + eps_t:
            raise ValidationError(
                f"record time {t_rec} outside (0, t_end={control.t_end}]")
        targets.append(min(t_rec, control.t_end))
    if control.t_end > 0.0 and (not targets
                                or targets[-1] < control.t_end - eps_t):
        targets.append(control.t_end)

    times = [0.0]
    dts: list[float] = []
    rows: list[np.ndarray] = []
    snaps: list[Snapshot] = []
    diverged = False
    error = None
    t = 0.0
    step_index = 0

    while True:
        v_extra = (velocity_extra_source(grid.centers, t)
                   if velocity_extra_source is not None else None)
        try:
            vel = solve_velocity(u, params, grid, extra_source=v_extra)
        except DriftclusterError as exc:
            diverged = True
            error = f"velocity solve failed at t={t:.6g}: {exc}"
            rows.append(np.full(len(DIAGNOSTICS), np.nan))
            break
        rows.append(_diagnostics_row(u, vel, params, grid))

        at_target = any(abs(t - tt) <= eps_t for tt in targets)
        final = t >= control.t_end - eps_t
        if ((step_index % snapshot_stride == 0 or at_target or final)
                and (not snaps or t - snaps[-1].t > eps_t)):
            snaps.append(Snapshot(t=t, u=u.copy(), phi=vel.values.copy()))
        if final:
            break

        hard = dt_limit(u, vel, params, grid)
        dt = min(control.dt_max, control.cfl_safety * hard)
        next_target = next(tt for tt in targets if tt > t + eps_t)
        dt = min(dt, next_target - t)
        if not np.isfinite(dt) or dt <= eps_t:
            diverged = True
            error = f"time step collapsed at t={t:.6g}"
            break

        d_src = (density_source(grid.centers, t)
                 if density_source is not None else None)
        try:
            u_next = _advance(u, params, dt, grid, vel, control, d_src)
            if control.velocity_resolve:
                vel_next = solve_velocity(u_next, params, grid,
                                          extra_source=v_extra)
                vel_avg = Velocity(
                    values=0.5 * (vel.values + vel_next.values),
                    face_values=0.5 * (vel.face_values + vel_next.face_values))
                hard_avg = dt_limit(u, vel_avg, params, grid)
                dt = min(dt, control.cfl_safety * hard_avg,
                         next_target - t)
                u_next = _advance(u, params, dt, grid, vel_avg, control, d_src)
        except DriftclusterError as exc:
            diverged = True
            error = f"step failed at t={t:.6g}: {exc}"
            break

        step_index += 1
        t = next_target if abs(t + dt - next_target) <= eps_t else t + dt
        u = u_next
        times.append(t)
        dts.append(dt)

    return Trajectory(
        grid=grid, params=params, control=control,
        times=np.array(times[:len(rows)]), dts=np.array(dts[:max(0, len(rows) - 1)]),
        data=np.array(rows).reshape(len(rows), len(DIAGNOSTICS)),
        snapshots=snaps, diverged=diverged, error=error)


def _advance(u, params, dt, grid, vel, control, source):
    if params.delta > 0.0:
        return step_imex(u, params, dt, grid, vel=vel,
                         limiter=control.flux_limiter, source=source)
    return step_transport(u, params, dt, grid, vel=vel,
                          limiter=control.flux_limiter, source=source)
