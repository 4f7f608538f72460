"""Screened elliptic solve for the aggregation velocity.

The velocity phi solves

    -epsilon phi'' + phi = d/dx E(u),    phi(-1) = phi(1) = 0,

on the same cell-centered mesh as the density.  The Dirichlet walls enter
through antisymmetric ghost cells (phi_ghost = -phi_adjacent), which keeps
the operator second-order accurate in the mesh; the wall rows get diagonal
1 + 3 epsilon / h^2.

The right-hand side defaults to the conservative face-difference of E(u)
("divergence" form).  The pointwise chain-rule form E'(u) u' is kept as a
cross-check; the two must agree to truncation order and the test suite
holds them to that.

Integrating the equation twice gives an exact representation of phi' in
terms of phi, u and their integrals; `gradient_identity_defect` evaluates
its discrete residual, and `gradient_lower_bound_margin` the one-sided
bounds that representation implies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularSystemError
from .grid import (Grid, centered_gradient, face_average, norm_l1, norm_l2,
                   norm_sup, total_mass)
from .model import Params, reproduction_rate, reproduction_rate_deriv
from .tridiag import TridiagonalSystem, apply_tridiagonal, thomas_solve


@dataclass
class Velocity:
    """Velocity samples: cell centers (n,) and faces (n + 1,)."""

    values: np.ndarray
    face_values: np.ndarray


def helmholtz_system(rhs, epsilon: float, grid: Grid) -> TridiagonalSystem:
    """Assemble (-epsilon D2 + I) phi = rhs with Dirichlet walls."""
    rhs = grid.check_field(rhs, "rhs")
    n = grid.n
    k = epsilon / grid.h ** 2
    diag = np.full(n, 1.0 + 2.0 * k)
    diag[0] += k   # antisymmetric ghost doubles the wall coupling
    diag[-1] += k
    off = np.full(n - 1, -k)
    return TridiagonalSystem(sub=off, diag=diag.copy(), sup=off.copy(), rhs=rhs)


def solve_helmholtz(rhs, epsilon: float, grid: Grid) -> np.ndarray:
    """Solve the screened Poisson problem and verify the residual."""
    system = helmholtz_system(rhs, epsilon, grid)
    phi = thomas_solve(system)
    if not np.isfinite(phi).all():
        raise SingularSystemError("velocity solve produced non-finite values")
    scale = (1.0 + 4.0 * epsilon / grid.h ** 2) * (1.0 + float(np.abs(phi).max()))
    residual = float(np.abs(apply_tridiagonal(system, phi) - system.rhs).max())
    if residual > 1e-10 * scale:
        raise SingularSystemError(
            f"velocity solve residual {residual:.3e} exceeds tolerance")
    return phi


def velocity_source(u, params: Params, grid: Grid) -> np.ndarray:
    """Discrete d/dx E(u) in the form selected by params.rhs_form."""
    u = grid.check_field(u, "u")
    if params.rhs_form == "divergence":
        e = reproduction_rate(u, params)
        # reflecting ghosts for u make the wall face values equal the
        # wall cell values, consistent with the no-flux condition on u
        e_face = np.empty(grid.n + 1)
        e_face[1:-1] = 0.5 * (e[:-1] + e[1:])
        e_face[0] = e[0]
        e_face[-1] = e[-1]
        return (e_face[1:] - e_face[:-1]) / grid.h
    return reproduction_rate_deriv(u, params) * centered_gradient(u, grid)


def solve_velocity(u, params: Params, grid: Grid, extra_source=None) -> Velocity:
    """Velocity field for density u; extra_source adds to the rhs (testing)."""
    rhs = velocity_source(u, params, grid)
    if extra_source is not None:
        rhs = rhs + grid.check_field(extra_source, "extra_source")
    phi = solve_helmholtz(rhs, params.epsilon, grid)
    return Velocity(values=phi, face_values=face_average(phi, grid))


def gradient_values(phi, grid: Grid) -> np.ndarray:
    """Centered gradient of the velocity with antisymmetric wall ghosts."""
    phi = grid.check_field(phi, "phi")
    h = grid.h
    out = np.empty_like(phi)
    out[1:-1] = (phi[2:] - phi[:-2]) / (2.0 * h)
    out[0] = (phi[1] + phi[0]) / (2.0 * h)
    out[-1] = -(phi[-1] + phi[-2]) / (2.0 * h)
    return out


def double_integral_term(phi, grid: Grid) -> np.ndarray:
    """I(x_i) = int_{-1}^{1} int_y^{x_i} phi(z) dz dy by midpoint cumulatives.

    With G(x) = int_{-1}^x phi, the double integral is 2 G(x) - int G.
    """
    phi = grid.check_field(phi, "phi")
    h = grid.h
    g_face = np.concatenate(([0.0], np.cumsum(h * phi)))
    g_center = g_face[:-1] + 0.5 * h * phi
    return 2.0 * g_center - h * g_center.sum()


def _representation_rhs(u, phi, params: Params, grid: Grid) -> np.ndarray:
    """epsilon phi'(x_i) according to the twice-integrated equation."""
    term = 0.5 * double_integral_term(phi, grid)
    if params.bistable:
        ap1 = params.a + 1.0
        return (term + u * u - ap1 * u
                - 0.5 * total_mass(u * u, grid) + 0.5 * ap1 * total_mass(u, grid))
    return term + u - 0.5 * total_mass(u, grid)


def gradient_identity_defect(u, phi, params: Params, grid: Grid) -> np.ndarray:
    """Residual of the exact phi' representation, evaluated per cell.

    Both sides are discretized consistently, so the defect measures pure
    discretization error and decays with the mesh (first order).
    """
    u = grid.check_field(u, "u")
    phi = grid.check_field(phi, "phi")
    lhs = params.epsilon * gradient_values(phi, grid)
    return lhs - _representation_rhs(u, phi, params, grid)


def gradient_lower_bound_margin(phi, u, params: Params, grid: Grid,
                                form: str = "proof") -> float:
    """Worst-cell margin of the one-sided lower bound on phi'.

    form="proof" uses the constant (2/epsilon) ||phi||_inf delivered by the
    twice-integrated representation; form="statement" uses the looser
    4 ||phi||_inf variant.  Both margins should be nonnegative up to
    discretization error; the proof form is the asserted one.
    """
    u = grid.check_field(u, "u")
    phi = grid.check_field(phi, "phi")
    eps = params.epsilon
    phi_sup = norm_sup(phi, grid)
    if form == "proof":
        lead = 2.0 / eps * phi_sup
    elif form == "statement":
        lead = 4.0 * phi_sup
    else:
        raise ValueError(f"form must be 'proof' or 'statement', got {form!r}")
    if params.bistable:
        const = ((params.a + 1.0) ** 2 / (4.0 * eps)
                 + 0.5 / eps * norm_l2(u, grid) ** 2)
    else:
        const = 0.5 / eps * norm_l1(u, grid)
    grad = gradient_values(phi, grid)
    return float((grad + lead + const).min())
